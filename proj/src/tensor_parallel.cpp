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

#include "ptsim/tensor_parallel.h"

#include <string>

#include "ptsim/kernels.h"

namespace ptsim {

namespace {

std::size_t U(int v) { return static_cast<std::size_t>(v); }

}  // namespace

void CheckShardable(const ModelConfig& cfg, int n_shards) {
  cfg.Validate();
  if (n_shards < 1) {
    throw ConfigError("n_shards must be at least 1, got " +
                      std::to_string(n_shards));
  }
  const std::pair<const char*, int> dims[] = {
      {"n_heads", cfg.n_heads},
      {"n_kv_heads", cfg.n_kv_heads},
      {"d_ff", cfg.d_ff},
  };
  for (const auto& [name, value] : dims) {
    if (value % n_shards != 0) {
      throw ConfigError(std::string(name) + " (" + std::to_string(value) +
                        ") is not divisible by n_shards (" +
                        std::to_string(n_shards) + ")");
    }
  }
}

template <typename T>
ShardedWeightSet<T> ShardWeights(const WeightSet<T>& w, const ModelConfig& cfg,
                                 int n_shards) {
  CheckShardable(cfg, n_shards);
  CheckWeightShapes(w, cfg);
  const std::size_t n = U(n_shards);
  const std::size_t q = U(cfg.q_width()) / n;
  const std::size_t kv = U(cfg.kv_width()) / n;
  const std::size_t ff = U(cfg.d_ff) / n;

  ShardedWeightSet<T> out;
  out.n_shards = n_shards;
  out.token_embedding = w.token_embedding;
  out.final_norm = w.final_norm;
  out.unembedding = w.unembedding;
  out.shards.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& lw : w.layers) {
      out.shards[s].push_back(LayerWeights<T>{
          .wq = SliceColumns(lw.wq, s * q, (s + 1) * q),
          .wk = SliceColumns(lw.wk, s * kv, (s + 1) * kv),
          .wv = SliceColumns(lw.wv, s * kv, (s + 1) * kv),
          .wo = SliceRows(lw.wo, s * q, (s + 1) * q),
          .w_gate = SliceColumns(lw.w_gate, s * ff, (s + 1) * ff),
          .w_up = SliceColumns(lw.w_up, s * ff, (s + 1) * ff),
          .w_down = SliceRows(lw.w_down, s * ff, (s + 1) * ff),
          .attn_norm = lw.attn_norm,
          .mlp_norm = lw.mlp_norm,
      });
    }
  }
  return out;
}

template <typename T>
WeightSet<T> ReassembleWeights(const ShardedWeightSet<T>& sharded,
                               const ModelConfig& cfg) {
  CheckShardable(cfg, sharded.n_shards);
  if (sharded.shards.size() != U(sharded.n_shards)) {
    throw DimensionError("sharded weights hold " +
                         std::to_string(sharded.shards.size()) +
                         " shards, expected " +
                         std::to_string(sharded.n_shards));
  }
  WeightSet<T> w;
  w.token_embedding = sharded.token_embedding;
  w.final_norm = sharded.final_norm;
  w.unembedding = sharded.unembedding;
  for (int l = 0; l < cfg.n_layers; ++l) {
    auto gather = [&](Tensor<T> LayerWeights<T>::*field, bool by_rows) {
      std::vector<Tensor<T>> parts;
      for (const auto& shard : sharded.shards) {
        parts.push_back(shard.at(U(l)).*field);
      }
      return by_rows ? ConcatRows<T>(parts) : ConcatColumns<T>(parts);
    };
    const auto& first = sharded.shards[0].at(U(l));
    w.layers.push_back(LayerWeights<T>{
        .wq = gather(&LayerWeights<T>::wq, false),
        .wk = gather(&LayerWeights<T>::wk, false),
        .wv = gather(&LayerWeights<T>::wv, false),
        .wo = gather(&LayerWeights<T>::wo, true),
        .w_gate = gather(&LayerWeights<T>::w_gate, false),
        .w_up = gather(&LayerWeights<T>::w_up, false),
        .w_down = gather(&LayerWeights<T>::w_down, true),
        .attn_norm = first.attn_norm,
        .mlp_norm = first.mlp_norm,
    });
  }
  CheckWeightShapes(w, cfg);
  return w;
}

template <typename T>
MeshRunResult<T> RunTpForward(std::span<const int> tokens,
                              const ModelConfig& cfg,
                              const ShardedWeightSet<T>& sharded,
                              Mesh<T>& mesh) {
  CheckShardable(cfg, sharded.n_shards);
  if (mesh.n_devices() != sharded.n_shards) {
    throw ConfigError("mesh has " + std::to_string(mesh.n_devices()) +
                      " devices but the weights have " +
                      std::to_string(sharded.n_shards) + " shards");
  }
  ValidateTokens(tokens, cfg);
  const std::vector<int> positions = Positions(tokens.size());
  const Tensor<T> x = Embed(tokens, sharded.token_embedding);
  const int local_heads = cfg.n_heads / sharded.n_shards;
  const int local_kv_heads = cfg.n_kv_heads / sharded.n_shards;

  mesh.ClearTrace();
  Tensor<T> logits;
  mesh.Launch([&](int rank) {
    const auto& layers = sharded.shards[U(rank)];
    Tensor<T> h = x;
    for (int layer = 1; layer <= cfg.n_layers; ++layer) {
      const LayerWeights<T>& lw = layers[U(layer - 1)];
      const Tensor<T> xn = RmsNorm(h, lw.attn_norm, cfg.norm_eps);
      const Tensor<T> heads =
          CausalAttention(xn, lw.wq, lw.wk, lw.wv, local_heads, local_kv_heads,
                          cfg.head_dim, positions, cfg.rope_base);
      h = Add(h, mesh.AllReduce(rank, Matmul(heads, lw.wo), ReduceOp::kSum,
                                layer));
      const Tensor<T> y = RmsNorm(h, lw.mlp_norm, cfg.norm_eps);
      h = Add(h, mesh.AllReduce(rank, GatedMlp(y, lw.w_gate, lw.w_up, lw.w_down),
                                ReduceOp::kSum, layer));
    }
    if (rank == 0) {
      logits = LmHead(h, sharded.final_norm, sharded.unembedding, cfg.norm_eps);
    }
  });
  return MeshRunResult<T>{std::move(logits), mesh.Trace()};
}

#define PTSIM_INSTANTIATE_TP(T)                                               \
  template ShardedWeightSet<T> ShardWeights<T>(const WeightSet<T>&,           \
                                               const ModelConfig&, int);      \
  template WeightSet<T> ReassembleWeights<T>(const ShardedWeightSet<T>&,      \
                                             const ModelConfig&);             \
  template MeshRunResult<T> RunTpForward<T>(std::span<const int>,             \
                                            const ModelConfig&,               \
                                            const ShardedWeightSet<T>&,       \
                                            Mesh<T>&);

PTSIM_INSTANTIATE_TP(float)
PTSIM_INSTANTIATE_TP(double)

#undef PTSIM_INSTANTIATE_TP

}  // namespace ptsim
