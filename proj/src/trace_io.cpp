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

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptsim/mesh.h"

namespace ptsim {

namespace {

constexpr std::string_view kAllReduce = "allreduce";

}  // namespace

std::string TraceToJsonLines(const SyncStats& stats) {
  std::string out;
  for (const SyncEvent& e : stats.events) {
    nlohmann::ordered_json line;
    line["seq_no"] = e.seq_no;
    line["layer_index"] = e.layer_index;
    line["kind"] = kAllReduce;
    line["participants"] = e.participants;
    line["elements"] = e.elements;
    line["payload_bytes"] = e.payload_bytes;
    out += line.dump();
    out += '\n';
  }
  return out;
}

SyncStats ParseTraceJsonLines(std::string_view text) {
  SyncStats stats;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.size() != 6) throw InputError("expected exactly 6 fields");
      if (j.at("kind").get<std::string>() != kAllReduce) {
        throw InputError("unknown kind " + j.at("kind").dump());
      }
      stats.Append(SyncEvent{
          .seq_no = j.at("seq_no").get<std::int64_t>(),
          .layer_index = j.at("layer_index").get<int>(),
          .kind = CollectiveKind::kAllReduce,
          .participants = j.at("participants").get<int>(),
          .elements = j.at("elements").get<std::int64_t>(),
          .payload_bytes = j.at("payload_bytes").get<std::int64_t>(),
      });
    } catch (const nlohmann::json::exception& e) {
      throw InputError("trace line " + std::to_string(line_no) + ": " +
                       e.what());
    } catch (const InputError& e) {
      throw InputError("trace line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return stats;
}

void ExportTrace(const SyncStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trace file " + path.string());
  out << TraceToJsonLines(stats);
  out.flush();
  if (!out) throw IoError("failed writing trace file " + path.string());
}

SyncStats ReadTrace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseTraceJsonLines(buf.str());
}

}  // namespace ptsim
