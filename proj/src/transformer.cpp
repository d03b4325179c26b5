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

#include "ptsim/transformer.h"

#include <cmath>
#include <string>

#include "ptsim/kernels.h"

namespace ptsim {

namespace {

template <typename T>
void ExpectShape(const Tensor<T>& t, const Shape& want,
                 const std::string& name) {
  if (t.shape() != want) {
    throw DimensionError(name + " has shape " + ShapeToString(t.shape()) +
                         ", expected " + ShapeToString(want));
  }
}

std::size_t U(int v) { return static_cast<std::size_t>(v); }

}  // namespace

template <typename T>
std::vector<LayerWeights<T>> MakeLayerStack(const ModelConfig& cfg,
                                            std::uint64_t base_seed) {
  cfg.Validate();
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  const std::size_t d = U(cfg.d_model), q = U(cfg.q_width()),
                    kv = U(cfg.kv_width()), ff = U(cfg.d_ff);
  std::vector<LayerWeights<T>> layers;
  layers.reserve(U(cfg.n_layers));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::uint64_t first = 2 + static_cast<std::uint64_t>(l) * kSeedsPerLayer;
    auto draw = [&](Shape shape, std::uint64_t slot) {
      return SeededInit<T>(shape, DeriveSeed(base_seed, first + slot), scale);
    };
    LayerWeights<T> lw{
        .wq = draw({d, q}, 0),
        .wk = draw({d, kv}, 1),
        .wv = draw({d, kv}, 2),
        .wo = draw({q, d}, 3),
        .w_gate = draw({d, ff}, 4),
        .w_up = draw({d, ff}, 5),
        .w_down = draw({ff, d}, 6),
        .attn_norm = Tensor<T>::Full({d}, T{1}),
        .mlp_norm = Tensor<T>::Full({d}, T{1}),
    };
    layers.push_back(std::move(lw));
  }
  return layers;
}

template <typename T>
WeightSet<T> MakeWeightSet(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  const std::size_t d = U(cfg.d_model), vocab = U(cfg.vocab_size);
  WeightSet<T> w;
  w.token_embedding = SeededInit<T>({vocab, d}, DeriveSeed(seed, 0), scale);
  w.unembedding = SeededInit<T>({d, vocab}, DeriveSeed(seed, 1), scale);
  w.final_norm = Tensor<T>::Full({d}, T{1});
  w.layers = MakeLayerStack<T>(cfg, seed);
  return w;
}

template <typename T>
WeightSet<T> MakeZeroWeightSet(const ModelConfig& cfg) {
  WeightSet<T> w = MakeWeightSet<T>(cfg, 0);
  auto zero = [](Tensor<T>& t) { t = Tensor<T>(t.shape()); };
  zero(w.token_embedding);
  zero(w.unembedding);
  for (auto& lw : w.layers) {
    for (Tensor<T>* t : {&lw.wq, &lw.wk, &lw.wv, &lw.wo, &lw.w_gate, &lw.w_up,
                         &lw.w_down}) {
      zero(*t);
    }
  }
  return w;
}

template <typename T>
void CheckLayerShapes(const std::vector<LayerWeights<T>>& layers,
                      const ModelConfig& cfg) {
  if (layers.size() != U(cfg.n_layers)) {
    throw DimensionError("weight stack has " + std::to_string(layers.size()) +
                         " layers, config expects " +
                         std::to_string(cfg.n_layers));
  }
  const std::size_t d = U(cfg.d_model), q = U(cfg.q_width()),
                    kv = U(cfg.kv_width()), ff = U(cfg.d_ff);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& lw = layers[l];
    const std::string at = "layer " + std::to_string(l) + " ";
    ExpectShape(lw.wq, {d, q}, at + "wq");
    ExpectShape(lw.wk, {d, kv}, at + "wk");
    ExpectShape(lw.wv, {d, kv}, at + "wv");
    ExpectShape(lw.wo, {q, d}, at + "wo");
    ExpectShape(lw.w_gate, {d, ff}, at + "w_gate");
    ExpectShape(lw.w_up, {d, ff}, at + "w_up");
    ExpectShape(lw.w_down, {ff, d}, at + "w_down");
    ExpectShape(lw.attn_norm, {d}, at + "attn_norm");
    ExpectShape(lw.mlp_norm, {d}, at + "mlp_norm");
  }
}

template <typename T>
void CheckWeightShapes(const WeightSet<T>& w, const ModelConfig& cfg) {
  const std::size_t d = U(cfg.d_model), vocab = U(cfg.vocab_size);
  ExpectShape(w.token_embedding, {vocab, d}, "token_embedding");
  ExpectShape(w.unembedding, {d, vocab}, "unembedding");
  ExpectShape(w.final_norm, {d}, "final_norm");
  CheckLayerShapes(w.layers, cfg);
}

std::vector<int> Positions(std::size_t seq) {
  std::vector<int> out(seq);
  for (std::size_t i = 0; i < seq; ++i) out[i] = static_cast<int>(i);
  return out;
}

void ValidateTokens(std::span<const int> tokens, const ModelConfig& cfg) {
  if (tokens.empty()) throw InputError("token sequence is empty");
  if (tokens.size() > U(cfg.max_seq)) {
    throw InputError("sequence length " + std::to_string(tokens.size()) +
                     " exceeds max_seq " + std::to_string(cfg.max_seq));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= cfg.vocab_size) {
      throw InputError("token at index " + std::to_string(i) + " is " +
                       std::to_string(tokens[i]) + ", outside vocabulary [0, " +
                       std::to_string(cfg.vocab_size) + ")");
    }
  }
}

template <typename T>
Tensor<T> Embed(std::span<const int> tokens, const Tensor<T>& table) {
  const std::size_t d = table.dim(1);
  Tensor<T> x({tokens.size(), d});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto src = table.row(U(tokens[i]));
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  return x;
}

template <typename T>
Tensor<T> CausalAttention(const Tensor<T>& x, const Tensor<T>& wq,
                          const Tensor<T>& wk, const Tensor<T>& wv,
                          int n_heads, int n_kv_heads, int head_dim,
                          std::span<const int> positions, double rope_base) {
  if (n_kv_heads <= 0 || n_heads % n_kv_heads != 0) {
    throw ConfigError("attention needs n_heads to be a multiple of n_kv_heads");
  }
  const std::size_t seq = x.dim(0), hd = U(head_dim), nh = U(n_heads),
                    nkv = U(n_kv_heads);
  ExpectShape(wq, {x.dim(1), nh * hd}, "wq");
  ExpectShape(wk, {x.dim(1), nkv * hd}, "wk");
  ExpectShape(wv, {x.dim(1), nkv * hd}, "wv");

  const Tensor<T> q =
      RopeApply(Matmul(x, wq).Reshaped({seq, nh, hd}), positions, rope_base);
  const Tensor<T> k =
      RopeApply(Matmul(x, wk).Reshaped({seq, nkv, hd}), positions, rope_base);
  const Tensor<T> v = Matmul(x, wv);

  const std::size_t group = nh / nkv;
  const T scale = T{1} / std::sqrt(static_cast<T>(head_dim));
  const auto qd = q.data();
  const auto kd = k.data();
  const auto vd = v.data();
  Tensor<T> out({seq, nh * hd});
  std::vector<T> probs;
  for (std::size_t i = 0; i < seq; ++i) {
    for (std::size_t h = 0; h < nh; ++h) {
      const std::size_t kvh = h / group;
      const T* qi = &qd[(i * nh + h) * hd];
      probs.assign(i + 1, T{0});
      for (std::size_t j = 0; j <= i; ++j) {
        const T* kj = &kd[(j * nkv + kvh) * hd];
        T dot = T{0};
        for (std::size_t e = 0; e < hd; ++e) dot += qi[e] * kj[e];
        probs[j] = dot * scale;
      }
      SoftmaxInPlace(std::span<T>(probs));
      T* dst = &out.data()[i * nh * hd + h * hd];
      for (std::size_t e = 0; e < hd; ++e) {
        T acc = T{0};
        for (std::size_t j = 0; j <= i; ++j) {
          acc += probs[j] * vd[(j * nkv + kvh) * hd + e];
        }
        dst[e] = acc;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> GatedMlp(const Tensor<T>& y, const Tensor<T>& w_gate,
                   const Tensor<T>& w_up, const Tensor<T>& w_down) {
  const Tensor<T> gated = Multiply(Silu(Matmul(y, w_gate)), Matmul(y, w_up));
  return Matmul(gated, w_down);
}

template <typename T>
Tensor<T> LayerForward(const Tensor<T>& h, const LayerWeights<T>& lw,
                       const ModelConfig& cfg,
                       std::span<const int> positions) {
  if (h.rank() != 2 || h.dim(1) != U(cfg.d_model)) {
    throw DimensionError("layer input has shape " + ShapeToString(h.shape()) +
                         ", expected [seq x " + std::to_string(cfg.d_model) +
                         "]");
  }
  if (h.dim(0) > U(cfg.max_seq)) {
    throw DimensionError("sequence length " + std::to_string(h.dim(0)) +
                         " exceeds max_seq " + std::to_string(cfg.max_seq));
  }
  const Tensor<T> x = RmsNorm(h, lw.attn_norm, cfg.norm_eps);
  const Tensor<T> heads =
      CausalAttention(x, lw.wq, lw.wk, lw.wv, cfg.n_heads, cfg.n_kv_heads,
                      cfg.head_dim, positions, cfg.rope_base);
  const Tensor<T> h1 = Add(h, Matmul(heads, lw.wo));
  const Tensor<T> y = RmsNorm(h1, lw.mlp_norm, cfg.norm_eps);
  return Add(h1, GatedMlp(y, lw.w_gate, lw.w_up, lw.w_down));
}

template <typename T>
Tensor<T> LmHead(const Tensor<T>& h, const Tensor<T>& final_norm,
                 const Tensor<T>& unembedding, double eps) {
  return Matmul(RmsNorm(h, final_norm, eps), unembedding);
}

template <typename T>
Tensor<T> DenseForward(std::span<const int> tokens, const ModelConfig& cfg,
                       const WeightSet<T>& w) {
  cfg.Validate();
  ValidateTokens(tokens, cfg);
  CheckWeightShapes(w, cfg);
  const std::vector<int> positions = Positions(tokens.size());
  Tensor<T> h = Embed(tokens, w.token_embedding);
  for (const auto& lw : w.layers) h = LayerForward(h, lw, cfg, positions);
  return LmHead(h, w.final_norm, w.unembedding, cfg.norm_eps);
}

#define PTSIM_INSTANTIATE_TRANSFORMER(T)                                      \
  template std::vector<LayerWeights<T>> MakeLayerStack<T>(const ModelConfig&, \
                                                          std::uint64_t);     \
  template WeightSet<T> MakeWeightSet<T>(const ModelConfig&, std::uint64_t);  \
  template WeightSet<T> MakeZeroWeightSet<T>(const ModelConfig&);             \
  template void CheckLayerShapes<T>(const std::vector<LayerWeights<T>>&,      \
                                    const ModelConfig&);                      \
  template void CheckWeightShapes<T>(const WeightSet<T>&, const ModelConfig&); \
  template Tensor<T> Embed<T>(std::span<const int>, const Tensor<T>&);        \
  template Tensor<T> CausalAttention<T>(                                      \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
      int, int, int, std::span<const int>, double);                           \
  template Tensor<T> GatedMlp<T>(const Tensor<T>&, const Tensor<T>&,          \
                                 const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> LayerForward<T>(const Tensor<T>&, const LayerWeights<T>&, \
                                     const ModelConfig&,                      \
                                     std::span<const int>);                   \
  template Tensor<T> LmHead<T>(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, double);                     \
  template Tensor<T> DenseForward<T>(std::span<const int>, const ModelConfig&, \
                                     const WeightSet<T>&);

PTSIM_INSTANTIATE_TRANSFORMER(float)
PTSIM_INSTANTIATE_TRANSFORMER(double)

#undef PTSIM_INSTANTIATE_TRANSFORMER

}  // namespace ptsim
