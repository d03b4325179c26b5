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

#ifndef PTSIM_REPORT_H_
#define PTSIM_REPORT_H_

#include <array>
#include <string>
#include <vector>

#include "ptsim/model_config.h"
#include "ptsim/perf_model.h"
#include "ptsim/pt_model.h"
#include "ptsim/run_config.h"

namespace ptsim {

inline constexpr std::array<int, 3> kTableBlockDepths = {2, 4, 8};
inline constexpr int kThroughputBatch = 256;
inline constexpr int kLatencyBatch = 1;

// Columns: Dense, then PT at each of kTableBlockDepths.
struct PerfTableRow {
  int input_len = 0;
  int output_len = 0;
  std::array<double, 4> throughput_tokens_per_sec{};
  std::array<double, 4> ttft_ms{};
  std::array<double, 4> tpot_ms{};
};

struct PerfTable {
  std::vector<PerfTableRow> rows;
};

// One row per (input_len, output_len), input-major. Throughput uses batch
// kThroughputBatch; TTFT and TPOT use kLatencyBatch. `pt` supplies the track
// shape; its block depth is replaced per column.
PerfTable BuildPerfTable(const ModelConfig& dense, int n_devices,
                         const PTConfig& pt, const std::vector<int>& input_lens,
                         const std::vector<int>& output_lens,
                         const HardwareProfile& hw);

// How the model opposite the configured one is derived. kSplit divides
// heads and widths evenly; kMatched also equalizes layer parameters by
// solving for the FFN width.
enum class Pairing { kSplit, kMatched };

Pairing ParsePairing(std::string_view name);

// Dense and PT pair for a run config: the configured model plus its
// counterpart. Requires n_layers divisible by every table block depth.
void ComparisonModels(const RunConfig& cfg, Pairing pairing, ModelConfig& dense,
                      PTConfig& pt);

std::string RenderCsv(const PerfTable& table);
std::string RenderMarkdown(const PerfTable& table);
std::string RenderTable(const PerfTable& table, TableFormat format);

// Two decimals, fixed notation.
std::string FormatFixed2(double value);

// RFC 4180 field quoting.
std::string CsvField(const std::string& field);

}  // namespace ptsim

#endif  // PTSIM_REPORT_H_
