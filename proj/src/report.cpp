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

#include "ptsim/report.h"

#include <cstdio>
#include <string>

#include "ptsim/errors.h"

namespace ptsim {

namespace {

const char* const kColumnNames[] = {"Dense", "PT (D=2)", "PT (D=4)",
                                    "PT (D=8)"};

struct Metric {
  const char* csv_name;
  const char* title;
  std::array<double, 4> PerfTableRow::*values;
};

const Metric kMetrics[] = {
    {"throughput_tokens_per_sec",
     "Throughput (output tokens/sec, batch 256)",
     &PerfTableRow::throughput_tokens_per_sec},
    {"ttft_ms", "TTFT (ms, batch 1)", &PerfTableRow::ttft_ms},
    {"tpot_ms", "TPOT (ms, batch 1)", &PerfTableRow::tpot_ms},
};

}  // namespace

std::string FormatFixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string CsvField(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

PerfTable BuildPerfTable(const ModelConfig& dense, int n_devices,
                         const PTConfig& pt, const std::vector<int>& input_lens,
                         const std::vector<int>& output_lens,
                         const HardwareProfile& hw) {
  if (input_lens.empty() || output_lens.empty()) {
    throw ConfigError("sweep needs at least one input and one output length");
  }
  PerfTable table;
  for (int in : input_lens) {
    for (int out : output_lens) {
      PerfTableRow row{.input_len = in, .output_len = out};
      const Workload throughput{in, out, kThroughputBatch};
      const Workload latency{in, out, kLatencyBatch};
      auto fill = [&](std::size_t col, auto estimate) {
        const PerfEstimate t = estimate(throughput);
        const PerfEstimate l = estimate(latency);
        row.throughput_tokens_per_sec[col] = t.throughput_tokens_per_sec;
        row.ttft_ms[col] = l.ttft_sec * 1e3;
        row.tpot_ms[col] = l.tpot_sec * 1e3;
      };
      fill(0, [&](const Workload& w) {
        return EstimateDenseTp(dense, n_devices, w, hw);
      });
      for (std::size_t i = 0; i < kTableBlockDepths.size(); ++i) {
        PTConfig variant = pt;
        variant.block_depth = kTableBlockDepths[i];
        fill(i + 1, [&](const Workload& w) { return EstimatePt(variant, w, hw); });
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

Pairing ParsePairing(std::string_view name) {
  if (name == "split") return Pairing::kSplit;
  if (name == "matched") return Pairing::kMatched;
  throw ConfigError("pairing must be \"split\" or \"matched\", got \"" +
                    std::string(name) + "\"");
}

void ComparisonModels(const RunConfig& cfg, Pairing pairing, ModelConfig& dense,
                      PTConfig& pt) {
  const bool matched = pairing == Pairing::kMatched;
  if (cfg.pt) {
    pt = *cfg.pt;
    dense = matched ? DenseCounterpartMatched(pt) : DenseCounterpart(pt);
  } else {
    dense = *cfg.dense;
    pt = matched ? PtCounterpartMatched(dense, cfg.n_devices, 1)
                 : PtCounterpart(dense, cfg.n_devices, 1);
  }
  for (int d : kTableBlockDepths) {
    if (dense.n_layers % d != 0) {
      throw ConfigError("n_layers (" + std::to_string(dense.n_layers) +
                        ") must be divisible by every table block depth "
                        "(2, 4, 8)");
    }
  }
}

std::string RenderCsv(const PerfTable& table) {
  std::string out = "metric,input_len,output_len";
  for (const char* name : kColumnNames) out += "," + CsvField(name);
  out += "\r\n";
  for (const Metric& m : kMetrics) {
    for (const auto& row : table.rows) {
      out += CsvField(m.csv_name) + "," + std::to_string(row.input_len) + "," +
             std::to_string(row.output_len);
      for (double v : row.*m.values) out += "," + FormatFixed2(v);
      out += "\r\n";
    }
  }
  return out;
}

std::string RenderMarkdown(const PerfTable& table) {
  std::string out;
  for (const Metric& m : kMetrics) {
    if (!out.empty()) out += "\n";
    out += "### " + std::string(m.title) + "\n\n";
    out += "| Input Len | Output Len |";
    for (const char* name : kColumnNames) out += " " + std::string(name) + " |";
    out += "\n|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& row : table.rows) {
      out += "| " + std::to_string(row.input_len) + " | " +
             std::to_string(row.output_len) + " |";
      for (double v : row.*m.values) out += " " + FormatFixed2(v) + " |";
      out += "\n";
    }
  }
  return out;
}

std::string RenderTable(const PerfTable& table, TableFormat format) {
  return format == TableFormat::kCsv ? RenderCsv(table) : RenderMarkdown(table);
}

}  // namespace ptsim
