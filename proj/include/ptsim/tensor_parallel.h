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

// Megatron-style tensor parallelism of the dense reference: attention is
// split by contiguous head ranges (Q/K/V column slices, O row slice) and the
// MLP column-then-row (gate/up column slices, down row slice). Each layer
// needs two all-reduces, one after attention and one after the MLP.

#ifndef PTSIM_TENSOR_PARALLEL_H_
#define PTSIM_TENSOR_PARALLEL_H_

#include <span>
#include <vector>

#include "ptsim/mesh.h"
#include "ptsim/model_config.h"
#include "ptsim/track_parallel.h"
#include "ptsim/transformer.h"

namespace ptsim {

template <typename T>
struct ShardedWeightSet {
  int n_shards = 0;
  // Replicated on every shard.
  Tensor<T> token_embedding;
  Tensor<T> final_norm;
  Tensor<T> unembedding;
  // shards[s][l] holds shard s's slices of layer l. Norm gains are
  // replicated.
  std::vector<std::vector<LayerWeights<T>>> shards;
};

// Throws ConfigError naming the dimension that n_shards does not divide.
void CheckShardable(const ModelConfig& cfg, int n_shards);

template <typename T>
ShardedWeightSet<T> ShardWeights(const WeightSet<T>& w, const ModelConfig& cfg,
                                 int n_shards);

template <typename T>
WeightSet<T> ReassembleWeights(const ShardedWeightSet<T>& sharded,
                               const ModelConfig& cfg);

template <typename T>
MeshRunResult<T> RunTpForward(std::span<const int> tokens,
                              const ModelConfig& cfg,
                              const ShardedWeightSet<T>& sharded,
                              Mesh<T>& mesh);

}  // namespace ptsim

#endif  // PTSIM_TENSOR_PARALLEL_H_
