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

#include "ptsim/pt_model.h"

#include <string>

#include "ptsim/errors.h"
#include "ptsim/kernels.h"

namespace ptsim {

std::string_view ReduceOpName(ReduceOp op) {
  return op == ReduceOp::kSum ? "sum" : "mean";
}

ReduceOp ParseReduceOp(std::string_view name) {
  if (name == "sum") return ReduceOp::kSum;
  if (name == "mean") return ReduceOp::kMean;
  throw ConfigError("reduce_op must be \"sum\" or \"mean\", got \"" +
                    std::string(name) + "\"");
}

void PTConfig::Validate() const {
  if (n_tracks < 1) {
    throw ConfigError("n_tracks must be at least 1, got " +
                      std::to_string(n_tracks));
  }
  if (block_depth < 1) {
    throw ConfigError("block_depth must be at least 1, got " +
                      std::to_string(block_depth));
  }
  track.Validate();
  if (track.n_layers % block_depth != 0) {
    throw ConfigError("n_layers (" + std::to_string(track.n_layers) +
                      ") must be divisible by block_depth (" +
                      std::to_string(block_depth) + "); D must divide L");
  }
}

template <typename T>
PTWeightSet<T> MakePTWeightSet(const PTConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  // Track 0 draws from seed ^ 0 == seed, so its stack is the dense one.
  const WeightSet<T> shared = MakeWeightSet<T>(cfg.track, seed);
  PTWeightSet<T> w;
  w.token_embedding = shared.token_embedding;
  w.unembedding = shared.unembedding;
  w.final_norm = shared.final_norm;
  w.tracks.reserve(static_cast<std::size_t>(cfg.n_tracks));
  w.tracks.push_back(shared.layers);
  for (int i = 1; i < cfg.n_tracks; ++i) {
    w.tracks.push_back(
        MakeLayerStack<T>(cfg.track, seed ^ static_cast<std::uint64_t>(i)));
  }
  return w;
}

template <typename T>
void CheckPTWeightShapes(const PTWeightSet<T>& w, const PTConfig& cfg) {
  if (w.tracks.size() != static_cast<std::size_t>(cfg.n_tracks)) {
    throw DimensionError("PT weights hold " + std::to_string(w.tracks.size()) +
                         " tracks, config expects " +
                         std::to_string(cfg.n_tracks));
  }
  const WeightSet<T> probe{w.token_embedding, {}, w.final_norm, w.unembedding};
  ModelConfig no_layers = cfg.track;
  no_layers.n_layers = 0;
  CheckWeightShapes(probe, no_layers);
  for (const auto& stack : w.tracks) CheckLayerShapes(stack, cfg.track);
}

template <typename T>
Tensor<T> Fuse(std::span<const Tensor<T>> parts, ReduceOp op) {
  if (parts.empty()) throw DimensionError("fuse needs at least one track");
  Tensor<T> out = parts[0];
  auto acc = out.data();
  for (std::size_t t = 1; t < parts.size(); ++t) {
    if (parts[t].shape() != out.shape()) {
      throw DimensionError("track " + std::to_string(t) + " has shape " +
                           ShapeToString(parts[t].shape()) +
                           ", track 0 has " + ShapeToString(out.shape()));
    }
    const auto src = parts[t].data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
  }
  if (op == ReduceOp::kMean) {
    const T n = static_cast<T>(parts.size());
    for (T& v : acc) v /= n;
  }
  return out;
}

template <typename T>
Tensor<T> PTForwardSequential(std::span<const int> tokens, const PTConfig& cfg,
                              const PTWeightSet<T>& w,
                              const FusionObserver<T>& observer) {
  cfg.Validate();
  ValidateTokens(tokens, cfg.track);
  CheckPTWeightShapes(w, cfg);
  const std::vector<int> positions = Positions(tokens.size());

  const Tensor<T> x = Embed(tokens, w.token_embedding);
  std::vector<Tensor<T>> states(static_cast<std::size_t>(cfg.n_tracks), x);
  Tensor<T> fused = x;
  for (int layer = 1; layer <= cfg.track.n_layers; ++layer) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      states[i] = LayerForward(states[i], w.tracks[i][layer - 1], cfg.track,
                               positions);
    }
    if (layer % cfg.block_depth == 0) {
      fused = Fuse<T>(states, cfg.reduce_op);
      for (auto& s : states) s = fused;
      if (observer) observer(layer, states);
    }
  }
  return LmHead(fused, w.final_norm, w.unembedding, cfg.track.norm_eps);
}

int CountFusions(const PTConfig& cfg) {
  cfg.Validate();
  return cfg.track.n_layers / cfg.block_depth;
}

namespace {

int SplitEvenly(int total, int parts, const char* what) {
  if (total % parts != 0) {
    throw ConfigError(std::string(what) + " (" + std::to_string(total) +
                      ") is not divisible by n_tracks (" +
                      std::to_string(parts) + ")");
  }
  return total / parts;
}

}  // namespace

PTConfig PtCounterpart(const ModelConfig& dense, int n_tracks, int block_depth,
                       ReduceOp op) {
  dense.Validate();
  if (n_tracks < 1) throw ConfigError("n_tracks must be at least 1");
  PTConfig pt;
  pt.n_tracks = n_tracks;
  pt.block_depth = block_depth;
  pt.reduce_op = op;
  pt.track = dense;
  pt.track.n_heads = SplitEvenly(dense.n_heads, n_tracks, "n_heads");
  pt.track.n_kv_heads = SplitEvenly(dense.n_kv_heads, n_tracks, "n_kv_heads");
  pt.track.d_model = pt.track.n_heads * dense.head_dim;
  pt.track.d_ff = SplitEvenly(dense.d_ff, n_tracks, "d_ff");
  pt.Validate();
  return pt;
}

ModelConfig DenseCounterpart(const PTConfig& pt) {
  pt.Validate();
  ModelConfig dense = pt.track;
  dense.n_heads *= pt.n_tracks;
  dense.n_kv_heads *= pt.n_tracks;
  dense.d_model = dense.n_heads * dense.head_dim;
  dense.d_ff *= pt.n_tracks;
  return dense;
}

namespace {

// FFN width that brings `cfg` to `target` layer parameters, rounded to a
// multiple of `multiple`.
int SolveFfnWidth(ModelConfig cfg, std::int64_t target, int multiple) {
  cfg.d_ff = 0;
  const std::int64_t attention = cfg.LayerParameterCount();
  const std::int64_t per_unit = 3LL * cfg.d_model * cfg.n_layers;
  const std::int64_t remaining = target - attention;
  const std::int64_t units = (remaining + per_unit / 2) / per_unit;
  const std::int64_t rounded = (units + multiple / 2) / multiple * multiple;
  if (remaining <= 0 || rounded <= 0) {
    throw ConfigError("cannot match parameters: attention alone has " +
                      std::to_string(attention) + " parameters against a " +
                      "budget of " + std::to_string(target));
  }
  return static_cast<int>(rounded);
}

}  // namespace

PTConfig PtCounterpartMatched(const ModelConfig& dense, int n_tracks,
                              int block_depth, ReduceOp op) {
  PTConfig pt = PtCounterpart(dense, n_tracks, block_depth, op);
  pt.track.d_ff = SolveFfnWidth(
      pt.track, dense.LayerParameterCount() / n_tracks, 8);
  pt.Validate();
  return pt;
}

ModelConfig DenseCounterpartMatched(const PTConfig& pt) {
  ModelConfig dense = DenseCounterpart(pt);
  dense.d_ff = SolveFfnWidth(
      dense, pt.track.LayerParameterCount() * pt.n_tracks, 8 * pt.n_tracks);
  dense.Validate();
  return dense;
}

StructuralPreset MakeStructuralPreset(std::string_view name, int block_depth) {
  constexpr int kTracks = 8;
  constexpr int kHeadDim = 128;
  int layers = 0, heads = 0;
  const int kv_heads = 8;
  if (name == "6b") {
    layers = 32;
    heads = 32;
  } else if (name == "13b") {
    layers = 40;
    heads = 40;
  } else if (name == "30b") {
    layers = 48;
    heads = 64;
  } else {
    throw ConfigError("unknown preset \"" + std::string(name) +
                      "\"; expected 6b, 13b or 30b");
  }
  ModelConfig dense =
      MakeModelConfig(heads * kHeadDim, layers, heads, kv_heads, 32000, 65536);
  // Keep the FFN width divisible across tracks.
  dense.d_ff = (dense.d_ff + 8 * kTracks - 1) / (8 * kTracks) * (8 * kTracks);
  return StructuralPreset{std::string(name), dense,
                          PtCounterpart(dense, kTracks, block_depth)};
}

#define PTSIM_INSTANTIATE_PT(T)                                               \
  template PTWeightSet<T> MakePTWeightSet<T>(const PTConfig&, std::uint64_t); \
  template void CheckPTWeightShapes<T>(const PTWeightSet<T>&,                 \
                                       const PTConfig&);                      \
  template Tensor<T> Fuse<T>(std::span<const Tensor<T>>, ReduceOp);           \
  template Tensor<T> PTForwardSequential<T>(std::span<const int>,             \
                                            const PTConfig&,                  \
                                            const PTWeightSet<T>&,            \
                                            const FusionObserver<T>&);

PTSIM_INSTANTIATE_PT(float)
PTSIM_INSTANTIATE_PT(double)

#undef PTSIM_INSTANTIATE_PT

}  // namespace ptsim
