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

#include "ptsim/track_parallel.h"

#include <string>
#include <vector>

#include "ptsim/transformer.h"

namespace ptsim {

template <typename T>
MeshRunResult<T> RunPtParallel(std::span<const int> tokens,
                               const PTConfig& cfg, const PTWeightSet<T>& w,
                               Mesh<T>& mesh, const RankFusionProbe<T>& probe) {
  cfg.Validate();
  if (mesh.n_devices() != cfg.n_tracks) {
    throw ConfigError("mesh has " + std::to_string(mesh.n_devices()) +
                      " devices but the PT model has " +
                      std::to_string(cfg.n_tracks) + " tracks");
  }
  ValidateTokens(tokens, cfg.track);
  CheckPTWeightShapes(w, cfg);
  const std::vector<int> positions = Positions(tokens.size());
  const Tensor<T> x = Embed(tokens, w.token_embedding);

  mesh.ClearTrace();
  Tensor<T> logits;
  mesh.Launch([&](int rank) {
    const auto& stack = w.tracks[static_cast<std::size_t>(rank)];
    Tensor<T> h = x;
    for (int layer = 1; layer <= cfg.track.n_layers; ++layer) {
      h = LayerForward(h, stack[layer - 1], cfg.track, positions);
      if (layer % cfg.block_depth == 0) {
        h = mesh.AllReduce(rank, h, cfg.reduce_op, layer);
        if (probe) probe(rank, layer, h);
      }
    }
    if (rank == 0) {
      logits = LmHead(h, w.final_norm, w.unembedding, cfg.track.norm_eps);
    }
  });
  return MeshRunResult<T>{std::move(logits), mesh.Trace()};
}

template MeshRunResult<float> RunPtParallel<float>(
    std::span<const int>, const PTConfig&, const PTWeightSet<float>&,
    Mesh<float>&, const RankFusionProbe<float>&);
template MeshRunResult<double> RunPtParallel<double>(
    std::span<const int>, const PTConfig&, const PTWeightSet<double>&,
    Mesh<double>&, const RankFusionProbe<double>&);

}  // namespace ptsim
