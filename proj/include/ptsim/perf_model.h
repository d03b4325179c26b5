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

// Closed-form synchronization counts and an analytic serving-latency model.
//
// The estimator is deliberately first-order: compute time is FLOPs over peak
// FLOP/s, and every collective is a ring all-reduce costed as a fixed latency
// plus 2(n-1)/n of the payload over the link bandwidth. It reproduces the
// direction of the dense-vs-PT comparison, not measured magnitudes.

#ifndef PTSIM_PERF_MODEL_H_
#define PTSIM_PERF_MODEL_H_

#include <cstdint>

#include "ptsim/model_config.h"
#include "ptsim/pt_model.h"

namespace ptsim {

enum class Arch { kDenseTp, kPt };

// kDenseTp: 2 * n_layers. kPt: n_layers / block_depth, which must divide.
std::int64_t SyncCount(Arch arch, int n_layers, int block_depth = 1);

// Fraction of tensor-parallel syncs removed by PT: 1 - 1 / (2 * D).
double SyncReductionFraction(int block_depth);

struct HardwareProfile {
  double flops_per_sec = 0;
  double link_bandwidth_bytes_per_sec = 0;
  double per_collective_latency_sec = 0;
  int element_bytes = 0;

  // Latency may be zero (an idealized link); everything else must be
  // strictly positive. Infinite bandwidth is accepted.
  void Validate() const;
};

// Ring all-reduce: latency + 2(n-1)/n * elements * element_bytes / bandwidth.
double CollectiveCost(std::int64_t elements, int n_devices,
                      const HardwareProfile& hw);

struct CostBreakdown {
  double compute_sec = 0;
  double collective_latency_sec = 0;
  double collective_transfer_sec = 0;

  double total() const {
    return compute_sec + collective_latency_sec + collective_transfer_sec;
  }
};

struct PerfEstimate {
  double ttft_sec = 0;
  double tpot_sec = 0;
  double throughput_tokens_per_sec = 0;
  CostBreakdown breakdown;         // prefill; sums to ttft_sec
  CostBreakdown decode_breakdown;  // one decode step; sums to tpot_sec
};

struct Workload {
  int input_len = 0;
  int output_len = 0;
  int batch = 1;
};

// Dense model split over n_devices with tensor parallelism.
PerfEstimate EstimateDenseTp(const ModelConfig& cfg, int n_devices,
                             const Workload& workload,
                             const HardwareProfile& hw);

// PT model with one track per device.
PerfEstimate EstimatePt(const PTConfig& cfg, const Workload& workload,
                        const HardwareProfile& hw);

// FLOPs for one sequence. Decode is one step at the given context length with
// a KV cache (attention linear in context).
double PrefillFlops(const ModelConfig& cfg, int input_len);
double DecodeStepFlops(const ModelConfig& cfg, double context_len);

}  // namespace ptsim

#endif  // PTSIM_PERF_MODEL_H_
