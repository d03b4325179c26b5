/* Copyright 2026 The ptsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ptsim/run_config.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptsim/errors.h"
#include "ptsim/kernels.h"
#include "ptsim/tensor_parallel.h"
#include "ptsim/transformer.h"

namespace ptsim {

namespace {

using Json = nlohmann::json;
using Path = std::vector<std::string>;

const char* const kModelFields[] = {"d_model",   "n_layers", "n_heads",
                                    "n_kv_heads", "head_dim", "d_ff",
                                    "vocab_size", "max_seq",  "norm_eps",
                                    "rope_base"};

std::string JoinPath(const Path& path) {
  std::string out;
  for (const auto& p : path) {
    if (!out.empty()) out += ".";
    out += p;
  }
  return out;
}

int LineAtOffset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

// Validates one JSON document and remembers the source text so that errors
// can point at a line.
class ConfigReader {
 public:
  ConfigReader(std::string_view text, std::string_view source)
      : text_(text), source_(source) {}

  [[noreturn]] void Fail(const Path& path, const std::string& message) const {
    throw ConfigError(std::string(source_) + ":" +
                      std::to_string(LineOf(path)) + ": " +
                      (path.empty() ? "" : JoinPath(path) + ": ") + message);
  }

  [[noreturn]] void FailAtLine(int line, const std::string& message) const {
    throw ConfigError(std::string(source_) + ":" + std::to_string(line) +
                      ": " + message);
  }

  // Line of the last key of `path`, found by walking the keys in order
  // through the raw text.
  int LineOf(const Path& path) const {
    std::size_t pos = 0, found = 0;
    for (const auto& key : path) {
      const std::string quoted = "\"" + key + "\"";
      std::size_t at = pos;
      while ((at = text_.find(quoted, at)) != std::string_view::npos) {
        std::size_t after = at + quoted.size();
        while (after < text_.size() &&
               (text_[after] == ' ' || text_[after] == '\t' ||
                text_[after] == '\n' || text_[after] == '\r')) {
          ++after;
        }
        if (after < text_.size() && text_[after] == ':') break;
        at += quoted.size();
      }
      if (at == std::string_view::npos) break;
      found = at;
      pos = at + quoted.size();
    }
    return LineAtOffset(text_, found);
  }

  void CheckKeys(const Json& obj, const Path& path,
                 std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) Fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Path at = path;
        at.push_back(key);
        Fail(at, "unknown field");
      }
    }
  }

  const Json* Find(const Json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  const Json& Require(const Json& obj, const Path& path,
                      const std::string& key) const {
    const Json* v = Find(obj, key);
    if (v == nullptr) Fail(path, "missing required field \"" + key + "\"");
    return *v;
  }

  std::int64_t Int(const Json& obj, const Path& path, const std::string& key,
                   std::optional<std::int64_t> fallback = std::nullopt) const {
    const Json* v = Find(obj, key);
    Path at = path;
    at.push_back(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      Fail(path, "missing required field \"" + key + "\"");
    }
    if (!v->is_number_integer()) Fail(at, "expected an integer");
    return v->get<std::int64_t>();
  }

  int SmallInt(const Json& obj, const Path& path, const std::string& key,
               std::optional<int> fallback = std::nullopt) const {
    const std::int64_t v = Int(obj, path, key, fallback);
    if (v < -(std::int64_t{1} << 31) || v >= (std::int64_t{1} << 31)) {
      Path at = path;
      at.push_back(key);
      Fail(at, "value out of range");
    }
    return static_cast<int>(v);
  }

  double Real(const Json& obj, const Path& path, const std::string& key,
              std::optional<double> fallback = std::nullopt) const {
    const Json* v = Find(obj, key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      Fail(path, "missing required field \"" + key + "\"");
    }
    if (!v->is_number()) {
      Path at = path;
      at.push_back(key);
      Fail(at, "expected a number");
    }
    return v->get<double>();
  }

  std::string String(const Json& obj, const Path& path,
                     const std::string& key) const {
    const Json& v = Require(obj, path, key);
    Path at = path;
    at.push_back(key);
    if (!v.is_string()) Fail(at, "expected a string");
    return v.get<std::string>();
  }

 private:
  std::string_view text_;
  std::string_view source_;
};

// Attributes a validation message to the model field it names first.
[[noreturn]] void FailModel(const ConfigReader& reader, const Path& path,
                            const std::string& message,
                            std::initializer_list<const char*> extra = {}) {
  std::size_t best = std::string::npos;
  std::string field;
  auto consider = [&](const char* name) {
    const std::size_t at = message.find(name);
    if (at != std::string::npos && at < best) {
      best = at;
      field = name;
    }
  };
  for (const char* name : kModelFields) consider(name);
  for (const char* name : extra) consider(name);
  Path at = path;
  if (!field.empty()) at.push_back(field);
  reader.Fail(at, message);
}

ModelConfig ParseModel(const ConfigReader& r, const Json& obj,
                       const Path& path) {
  r.CheckKeys(obj, path,
              {"d_model", "n_layers", "n_heads", "n_kv_heads", "head_dim",
               "d_ff", "vocab_size", "max_seq", "norm_eps", "rope_base"});
  ModelConfig cfg;
  cfg.d_model = r.SmallInt(obj, path, "d_model");
  cfg.n_layers = r.SmallInt(obj, path, "n_layers");
  cfg.n_heads = r.SmallInt(obj, path, "n_heads");
  cfg.n_kv_heads = r.SmallInt(obj, path, "n_kv_heads");
  cfg.head_dim = r.SmallInt(obj, path, "head_dim",
                            cfg.n_heads > 0 ? cfg.d_model / cfg.n_heads : 0);
  cfg.d_ff = r.SmallInt(obj, path, "d_ff", DefaultFfnWidth(cfg.d_model));
  cfg.vocab_size = r.SmallInt(obj, path, "vocab_size");
  cfg.max_seq = r.SmallInt(obj, path, "max_seq");
  cfg.norm_eps = r.Real(obj, path, "norm_eps", 1e-5);
  cfg.rope_base = r.Real(obj, path, "rope_base", 10000.0);
  try {
    cfg.Validate();
  } catch (const ConfigError& e) {
    FailModel(r, path, e.what());
  }
  return cfg;
}

PTConfig ParsePt(const ConfigReader& r, const Json& obj, const Path& path) {
  r.CheckKeys(obj, path, {"n_tracks", "block_depth", "reduce_op", "track"});
  PTConfig cfg;
  cfg.n_tracks = r.SmallInt(obj, path, "n_tracks");
  cfg.block_depth = r.SmallInt(obj, path, "block_depth");
  if (const Json* op = r.Find(obj, "reduce_op")) {
    Path at = path;
    at.push_back("reduce_op");
    if (!op->is_string()) r.Fail(at, "expected a string");
    try {
      cfg.reduce_op = ParseReduceOp(op->get<std::string>());
    } catch (const ConfigError& e) {
      r.Fail(at, e.what());
    }
  }
  Path track_path = path;
  track_path.push_back("track");
  cfg.track = ParseModel(r, r.Require(obj, path, "track"), track_path);
  try {
    cfg.Validate();
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    Path at = path;
    if (message.find("block_depth") != std::string::npos) {
      at.push_back("block_depth");
    } else if (message.find("n_tracks") != std::string::npos) {
      at.push_back("n_tracks");
    }
    r.Fail(at, message);
  }
  return cfg;
}

HardwareProfile ParseHardware(const ConfigReader& r, const Json& obj,
                              const Path& path) {
  r.CheckKeys(obj, path,
              {"flops_per_sec", "link_bandwidth_bytes_per_sec",
               "per_collective_latency_sec", "element_bytes"});
  HardwareProfile hw{
      .flops_per_sec = r.Real(obj, path, "flops_per_sec"),
      .link_bandwidth_bytes_per_sec =
          r.Real(obj, path, "link_bandwidth_bytes_per_sec"),
      .per_collective_latency_sec =
          r.Real(obj, path, "per_collective_latency_sec"),
      .element_bytes = r.SmallInt(obj, path, "element_bytes"),
  };
  try {
    hw.Validate();
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    Path at = path;
    for (const char* name :
         {"flops_per_sec", "link_bandwidth_bytes_per_sec",
          "per_collective_latency_sec", "element_bytes"}) {
      if (message.rfind(name, 0) == 0) at.push_back(name);
    }
    r.Fail(at, message);
  }
  return hw;
}

}  // namespace

std::string_view TableFormatName(TableFormat format) {
  return format == TableFormat::kCsv ? "csv" : "markdown";
}

TableFormat ParseTableFormat(std::string_view name) {
  if (name == "csv") return TableFormat::kCsv;
  if (name == "markdown") return TableFormat::kMarkdown;
  throw ConfigError("format must be \"csv\" or \"markdown\", got \"" +
                    std::string(name) + "\"");
}

std::vector<int> SeededPrompt(std::size_t length, std::uint64_t seed,
                              int vocab_size) {
  if (vocab_size < 1) throw ConfigError("vocab_size must be positive");
  SplitMix64 rng(seed);
  std::vector<int> tokens(length);
  for (auto& t : tokens) {
    t = static_cast<int>(rng.Next() % static_cast<std::uint64_t>(vocab_size));
  }
  return tokens;
}

std::vector<int> RunConfig::Tokens() const {
  if (!run.tokens.empty()) return run.tokens;
  return SeededPrompt(static_cast<std::size_t>(run.prompt_len), run.seed,
                      model().vocab_size);
}

int ResolveElementWidth(int configured) {
  const char* env = std::getenv("PTSIM_ELEMENT_WIDTH");
  if (env == nullptr || *env == '\0') return configured;
  const std::string value(env);
  if (value == "32") return 32;
  if (value == "64") return 64;
  throw ConfigError("PTSIM_ELEMENT_WIDTH must be 32 or 64, got \"" + value +
                    "\"");
}

RunConfig ParseRunConfig(std::string_view text, std::string_view source) {
  ConfigReader r(text, source);
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    r.FailAtLine(LineAtOffset(text, e.byte == 0 ? 0 : e.byte - 1),
                 std::string("malformed JSON: ") + e.what());
  }
  r.CheckKeys(root, {}, {"model", "run", "mesh", "hardware", "output"});

  RunConfig cfg;
  const Json& model = r.Require(root, {}, "model");
  r.CheckKeys(model, {"model"}, {"dense", "pt"});
  const Json* dense = r.Find(model, "dense");
  const Json* pt = r.Find(model, "pt");
  if ((dense == nullptr) == (pt == nullptr)) {
    r.Fail({"model"}, "exactly one of \"dense\" or \"pt\" must be present");
  }
  if (dense != nullptr) cfg.dense = ParseModel(r, *dense, {"model", "dense"});
  if (pt != nullptr) cfg.pt = ParsePt(r, *pt, {"model", "pt"});

  const Json& mesh = r.Require(root, {}, "mesh");
  r.CheckKeys(mesh, {"mesh"}, {"n_devices"});
  cfg.n_devices = r.SmallInt(mesh, {"mesh"}, "n_devices");
  if (cfg.n_devices < 1) {
    r.Fail({"mesh", "n_devices"}, "must be at least 1");
  }
  if (cfg.pt && cfg.n_devices != cfg.pt->n_tracks) {
    r.Fail({"mesh", "n_devices"},
           "n_devices (" + std::to_string(cfg.n_devices) +
               ") must equal pt.n_tracks (" +
               std::to_string(cfg.pt->n_tracks) + "); one track per device");
  }
  if (cfg.dense) {
    try {
      CheckShardable(*cfg.dense, cfg.n_devices);
    } catch (const ConfigError& e) {
      r.Fail({"mesh", "n_devices"}, e.what());
    }
  }

  const Json& run = r.Require(root, {}, "run");
  r.CheckKeys(run, {"run"}, {"tokens", "prompt_len", "seed", "element_width"});
  const Json* tokens = r.Find(run, "tokens");
  const Json* prompt_len = r.Find(run, "prompt_len");
  if ((tokens == nullptr) == (prompt_len == nullptr)) {
    r.Fail({"run"}, "exactly one of \"tokens\" or \"prompt_len\" must be "
                    "present");
  }
  const Json& seed = r.Require(run, {"run"}, "seed");
  if (!seed.is_number_unsigned()) {
    r.Fail({"run", "seed"}, "expected a non-negative integer");
  }
  cfg.run.seed = seed.get<std::uint64_t>();
  cfg.run.element_width = r.SmallInt(run, {"run"}, "element_width", 32);
  if (cfg.run.element_width != 32 && cfg.run.element_width != 64) {
    r.Fail({"run", "element_width"}, "must be 32 or 64");
  }
  Path token_path{"run"};
  if (tokens != nullptr) {
    token_path.push_back("tokens");
    if (!tokens->is_array()) r.Fail(token_path, "expected an array of ints");
    for (const auto& t : *tokens) {
      if (!t.is_number_integer()) r.Fail(token_path, "expected integers");
      cfg.run.tokens.push_back(t.get<int>());
    }
  } else {
    token_path.push_back("prompt_len");
    cfg.run.prompt_len = r.SmallInt(run, {"run"}, "prompt_len");
  }
  try {
    const auto prompt = cfg.Tokens();
    ValidateTokens(prompt, cfg.model());
  } catch (const Error& e) {
    r.Fail(token_path, e.what());
  }

  if (const Json* hw = r.Find(root, "hardware")) {
    cfg.hardware = ParseHardware(r, *hw, {"hardware"});
  }

  if (const Json* out = r.Find(root, "output")) {
    r.CheckKeys(*out, {"output"}, {"trace_path", "table_path", "format"});
    for (const char* key : {"trace_path", "table_path"}) {
      if (r.Find(*out, key) == nullptr) continue;
      std::string value = r.String(*out, {"output"}, key);
      if (value.empty()) r.Fail({"output", key}, "path must be non-empty");
      (std::string_view(key) == "trace_path" ? cfg.output.trace_path
                                             : cfg.output.table_path) = value;
    }
    if (r.Find(*out, "format") != nullptr) {
      try {
        cfg.output.format =
            ParseTableFormat(r.String(*out, {"output"}, "format"));
      } catch (const ConfigError& e) {
        if (std::string_view(e.what()).find(source) == 0) throw;
        r.Fail({"output", "format"}, e.what());
      }
    }
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str(), path.string());
}

}  // namespace ptsim
