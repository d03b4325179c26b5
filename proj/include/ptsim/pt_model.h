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

// Track-parallel (PT) transformer: n independent tracks of the same shape,
// fused with an all-reduce after every block of D layers. This header holds
// the single-device sequential form, which is the oracle for the parallel
// runner in track_parallel.h.

#ifndef PTSIM_PT_MODEL_H_
#define PTSIM_PT_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptsim/model_config.h"
#include "ptsim/tensor.h"
#include "ptsim/transformer.h"

namespace ptsim {

enum class ReduceOp { kSum, kMean };

std::string_view ReduceOpName(ReduceOp op);
ReduceOp ParseReduceOp(std::string_view name);

struct PTConfig {
  int n_tracks = 1;
  int block_depth = 1;
  ModelConfig track;
  ReduceOp reduce_op = ReduceOp::kSum;

  // Rejects n_layers not divisible by block_depth; there are no partial
  // trailing blocks.
  void Validate() const;

  friend bool operator==(const PTConfig&, const PTConfig&) = default;
};

template <typename T>
struct PTWeightSet {
  Tensor<T> token_embedding;  // vocab x track.d_model, shared by all tracks
  std::vector<std::vector<LayerWeights<T>>> tracks;
  Tensor<T> final_norm;
  Tensor<T> unembedding;  // track.d_model x vocab, shared

  friend bool operator==(const PTWeightSet&, const PTWeightSet&) = default;
};

// Shared tensors come from `seed`, track i's layer stack from seed ^ i. With
// one track this is exactly MakeWeightSet(cfg.track, seed).
template <typename T>
PTWeightSet<T> MakePTWeightSet(const PTConfig& cfg, std::uint64_t seed);

template <typename T>
void CheckPTWeightShapes(const PTWeightSet<T>& w, const PTConfig& cfg);

// Element-wise reduction in ascending list order. kMean divides the sum by n.
template <typename T>
Tensor<T> Fuse(std::span<const Tensor<T>> parts, ReduceOp op);

// Called after each fusion with the 1-based layer index and every track's
// state after the rebroadcast.
template <typename T>
using FusionObserver =
    std::function<void(int layer, std::span<const Tensor<T>> track_states)>;

template <typename T>
Tensor<T> PTForwardSequential(std::span<const int> tokens, const PTConfig& cfg,
                              const PTWeightSet<T>& w,
                              const FusionObserver<T>& observer = {});

// n_layers / block_depth.
int CountFusions(const PTConfig& cfg);

// Dense model and its PT split with heads, KV heads, and widths evenly
// distributed across tracks.
PTConfig PtCounterpart(const ModelConfig& dense, int n_tracks, int block_depth,
                       ReduceOp op = ReduceOp::kSum);
ModelConfig DenseCounterpart(const PTConfig& pt);

// As above, but the derived model's FFN width is solved so that total layer
// parameters match (n tracks of the PT model vs one dense model), rounded to
// a multiple of 8 (8 * n for the dense side so it stays shardable). Throws
// ConfigError when attention alone already exceeds the budget.
PTConfig PtCounterpartMatched(const ModelConfig& dense, int n_tracks,
                              int block_depth, ReduceOp op = ReduceOp::kSum);
ModelConfig DenseCounterpartMatched(const PTConfig& pt);

// Layer and head structure of the 6B/13B/30B models with 8 tracks. Widths are
// not published, so head_dim is fixed at 128 and everything else follows.
struct StructuralPreset {
  std::string name;
  ModelConfig dense;
  PTConfig pt;
};

StructuralPreset MakeStructuralPreset(std::string_view name, int block_depth);

}  // namespace ptsim

#endif  // PTSIM_PT_MODEL_H_
