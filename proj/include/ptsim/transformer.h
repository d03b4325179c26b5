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

// Single-device dense transformer: embedding, L pre-norm layers of grouped
// query attention plus a SiLU-gated MLP, final RMS norm, unembedding.
//
// The pieces (CausalAttention, GatedMlp, LmHead) are exposed separately so the
// tensor-parallel and track-parallel runners execute exactly the same
// arithmetic as the single-device reference.

#ifndef PTSIM_TRANSFORMER_H_
#define PTSIM_TRANSFORMER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ptsim/model_config.h"
#include "ptsim/tensor.h"

namespace ptsim {

template <typename T>
struct LayerWeights {
  Tensor<T> wq;      // d_model x (n_heads * head_dim)
  Tensor<T> wk;      // d_model x (n_kv_heads * head_dim)
  Tensor<T> wv;      // d_model x (n_kv_heads * head_dim)
  Tensor<T> wo;      // (n_heads * head_dim) x d_model
  Tensor<T> w_gate;  // d_model x d_ff
  Tensor<T> w_up;    // d_model x d_ff
  Tensor<T> w_down;  // d_ff x d_model
  Tensor<T> attn_norm;
  Tensor<T> mlp_norm;

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

template <typename T>
struct WeightSet {
  Tensor<T> token_embedding;  // vocab x d_model
  std::vector<LayerWeights<T>> layers;
  Tensor<T> final_norm;
  Tensor<T> unembedding;  // d_model x vocab

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

// Seed ordinals: 0 embedding, 1 unembedding, then kSeedsPerLayer per layer.
inline constexpr std::uint64_t kSeedsPerLayer = 7;

// Layer stack drawn from base_seed. Projections use scale 1/sqrt(d_model);
// norm gains start at one.
template <typename T>
std::vector<LayerWeights<T>> MakeLayerStack(const ModelConfig& cfg,
                                            std::uint64_t base_seed);

template <typename T>
WeightSet<T> MakeWeightSet(const ModelConfig& cfg, std::uint64_t seed);

// Same shapes as MakeWeightSet, every projection zero, gains one.
template <typename T>
WeightSet<T> MakeZeroWeightSet(const ModelConfig& cfg);

template <typename T>
void CheckLayerShapes(const std::vector<LayerWeights<T>>& layers,
                      const ModelConfig& cfg);

template <typename T>
void CheckWeightShapes(const WeightSet<T>& w, const ModelConfig& cfg);

std::vector<int> Positions(std::size_t seq);

// Checks every id against the vocabulary and the length against max_seq.
void ValidateTokens(std::span<const int> tokens, const ModelConfig& cfg);

template <typename T>
Tensor<T> Embed(std::span<const int> tokens, const Tensor<T>& table);

// Causal GQA over a head range. x is the normalized input [seq x d_model];
// the projections may be column slices holding n_heads query heads and
// n_kv_heads KV heads. Returns the concatenated head outputs
// [seq x n_heads * head_dim].
template <typename T>
Tensor<T> CausalAttention(const Tensor<T>& x, const Tensor<T>& wq,
                          const Tensor<T>& wk, const Tensor<T>& wv,
                          int n_heads, int n_kv_heads, int head_dim,
                          std::span<const int> positions, double rope_base);

// down(silu(gate(y)) * up(y)).
template <typename T>
Tensor<T> GatedMlp(const Tensor<T>& y, const Tensor<T>& w_gate,
                   const Tensor<T>& w_up, const Tensor<T>& w_down);

template <typename T>
Tensor<T> LayerForward(const Tensor<T>& h, const LayerWeights<T>& lw,
                       const ModelConfig& cfg,
                       std::span<const int> positions);

// Final norm and unembedding: [seq x d_model] -> [seq x vocab].
template <typename T>
Tensor<T> LmHead(const Tensor<T>& h, const Tensor<T>& final_norm,
                 const Tensor<T>& unembedding, double eps);

template <typename T>
Tensor<T> DenseForward(std::span<const int> tokens, const ModelConfig& cfg,
                       const WeightSet<T>& w);

}  // namespace ptsim

#endif  // PTSIM_TRANSFORMER_H_
