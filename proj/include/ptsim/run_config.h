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

#ifndef PTSIM_RUN_CONFIG_H_
#define PTSIM_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptsim/model_config.h"
#include "ptsim/perf_model.h"
#include "ptsim/pt_model.h"

namespace ptsim {

enum class TableFormat { kCsv, kMarkdown };

struct RunSection {
  std::vector<int> tokens;  // explicit prompt; empty means seeded prompt
  int prompt_len = 0;
  std::uint64_t seed = 0;
  int element_width = 32;
};

struct OutputSection {
  std::optional<std::string> trace_path;
  std::optional<std::string> table_path;
  TableFormat format = TableFormat::kMarkdown;
};

// Parsed experiment config. Exactly one of `dense` / `pt` is set.
struct RunConfig {
  std::optional<ModelConfig> dense;
  std::optional<PTConfig> pt;
  RunSection run;
  int n_devices = 1;
  std::optional<HardwareProfile> hardware;
  OutputSection output;

  // The explicit tokens, or the seeded prompt of run.prompt_len tokens.
  std::vector<int> Tokens() const;
  const ModelConfig& model() const { return dense ? *dense : pt->track; }
};

// Parses and validates a JSON config. Errors are ConfigError with a
// "<source>:<line>: " prefix pointing at the offending field.
RunConfig ParseRunConfig(std::string_view text, std::string_view source);

// IoError when the file cannot be read.
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Token i is output i of SplitMix64(seed) modulo vocab_size.
std::vector<int> SeededPrompt(std::size_t length, std::uint64_t seed,
                              int vocab_size);

// Applies the PTSIM_ELEMENT_WIDTH override (32 or 64) when it is set.
int ResolveElementWidth(int configured);

std::string_view TableFormatName(TableFormat format);
TableFormat ParseTableFormat(std::string_view name);

}  // namespace ptsim

#endif  // PTSIM_RUN_CONFIG_H_
