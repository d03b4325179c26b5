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

#include "ptsim/perf_model.h"

#include <cmath>
#include <string>

#include "ptsim/errors.h"

namespace ptsim {

std::int64_t SyncCount(Arch arch, int n_layers, int block_depth) {
  if (n_layers < 1) {
    throw ConfigError("n_layers must be at least 1, got " +
                      std::to_string(n_layers));
  }
  if (arch == Arch::kDenseTp) return 2 * std::int64_t{n_layers};
  if (block_depth < 1 || n_layers % block_depth != 0) {
    throw ConfigError("block_depth (" + std::to_string(block_depth) +
                      ") must divide n_layers (" + std::to_string(n_layers) +
                      ")");
  }
  return n_layers / block_depth;
}

double SyncReductionFraction(int block_depth) {
  if (block_depth < 1) {
    throw ConfigError("block_depth must be at least 1, got " +
                      std::to_string(block_depth));
  }
  return 1.0 - 1.0 / (2.0 * block_depth);
}

void HardwareProfile::Validate() const {
  if (!(flops_per_sec > 0)) throw ConfigError("flops_per_sec must be positive");
  if (!(link_bandwidth_bytes_per_sec > 0)) {
    throw ConfigError("link_bandwidth_bytes_per_sec must be positive");
  }
  if (!(per_collective_latency_sec >= 0) ||
      !std::isfinite(per_collective_latency_sec)) {
    throw ConfigError("per_collective_latency_sec must be finite and >= 0");
  }
  if (element_bytes < 1) throw ConfigError("element_bytes must be positive");
}

namespace {

double TransferSec(std::int64_t elements, int n_devices,
                   const HardwareProfile& hw) {
  if (n_devices <= 1 || elements == 0) return 0.0;
  const double factor = 2.0 * (n_devices - 1) / n_devices;
  return factor * static_cast<double>(elements) * hw.element_bytes /
         hw.link_bandwidth_bytes_per_sec;
}

void ValidateWorkload(const Workload& w) {
  if (w.input_len < 1 || w.output_len < 1 || w.batch < 1) {
    throw ConfigError("input_len, output_len and batch must be positive");
  }
}

// Shared by both architectures. layer_share is the fraction of the layer
// FLOPs one device executes (1/n for tensor parallelism, one full track for
// PT). The LM head runs replicated.
PerfEstimate Estimate(const ModelConfig& cfg, double layer_share,
                      int n_devices, std::int64_t syncs,
                      const Workload& workload, const HardwareProfile& hw) {
  ValidateWorkload(workload);
  hw.Validate();
  const double batch = workload.batch;
  const double lm_head = 2.0 * cfg.d_model * static_cast<double>(cfg.vocab_size);

  const double prefill_flops =
      batch * ((PrefillFlops(cfg, workload.input_len) - lm_head) * layer_share +
               lm_head);
  const double average_context =
      workload.input_len + (workload.output_len + 1) / 2.0;
  const double decode_flops =
      batch * ((DecodeStepFlops(cfg, average_context) - lm_head) * layer_share +
               lm_head);

  const std::int64_t prefill_elements =
      std::int64_t{workload.input_len} * workload.batch * cfg.d_model;
  const std::int64_t decode_elements =
      std::int64_t{workload.batch} * cfg.d_model;
  const double latency = static_cast<double>(syncs) * hw.per_collective_latency_sec;

  PerfEstimate est;
  est.breakdown = CostBreakdown{
      .compute_sec = prefill_flops / hw.flops_per_sec,
      .collective_latency_sec = latency,
      .collective_transfer_sec =
          static_cast<double>(syncs) * TransferSec(prefill_elements, n_devices, hw),
  };
  est.decode_breakdown = CostBreakdown{
      .compute_sec = decode_flops / hw.flops_per_sec,
      .collective_latency_sec = latency,
      .collective_transfer_sec =
          static_cast<double>(syncs) * TransferSec(decode_elements, n_devices, hw),
  };
  est.ttft_sec = est.breakdown.total();
  est.tpot_sec = est.decode_breakdown.total();
  est.throughput_tokens_per_sec =
      batch * workload.output_len /
      (est.ttft_sec + workload.output_len * est.tpot_sec);
  return est;
}

}  // namespace

double CollectiveCost(std::int64_t elements, int n_devices,
                      const HardwareProfile& hw) {
  if (elements < 0 || n_devices < 1) {
    throw ConfigError("collective cost needs elements >= 0 and n >= 1");
  }
  return hw.per_collective_latency_sec + TransferSec(elements, n_devices, hw);
}

double PrefillFlops(const ModelConfig& cfg, int input_len) {
  const double s = input_len;
  const double dense = 2.0 * static_cast<double>(cfg.LayerParameterCount()) * s;
  // QK^T and PV over the causal triangle.
  const double attention =
      4.0 * cfg.n_layers * cfg.q_width() * (s * (s + 1) / 2.0);
  const double lm_head = 2.0 * cfg.d_model * static_cast<double>(cfg.vocab_size);
  return dense + attention + lm_head;
}

double DecodeStepFlops(const ModelConfig& cfg, double context_len) {
  const double dense = 2.0 * static_cast<double>(cfg.LayerParameterCount());
  const double attention = 4.0 * cfg.n_layers * cfg.q_width() * context_len;
  const double lm_head = 2.0 * cfg.d_model * static_cast<double>(cfg.vocab_size);
  return dense + attention + lm_head;
}

PerfEstimate EstimateDenseTp(const ModelConfig& cfg, int n_devices,
                             const Workload& workload,
                             const HardwareProfile& hw) {
  cfg.Validate();
  if (n_devices < 1) throw ConfigError("n_devices must be at least 1");
  return Estimate(cfg, 1.0 / n_devices, n_devices,
                  SyncCount(Arch::kDenseTp, cfg.n_layers), workload, hw);
}

PerfEstimate EstimatePt(const PTConfig& cfg, const Workload& workload,
                        const HardwareProfile& hw) {
  cfg.Validate();
  return Estimate(cfg.track, 1.0, cfg.n_tracks,
                  SyncCount(Arch::kPt, cfg.track.n_layers, cfg.block_depth),
                  workload, hw);
}

}  // namespace ptsim
