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

#ifndef PTSIM_TRACK_PARALLEL_H_
#define PTSIM_TRACK_PARALLEL_H_

#include <functional>
#include <span>

#include "ptsim/mesh.h"
#include "ptsim/pt_model.h"
#include "ptsim/tensor.h"

namespace ptsim {

template <typename T>
struct MeshRunResult {
  Tensor<T> logits;
  SyncStats stats;
};

// Invoked on the worker thread of `rank` right after each fusion with that
// rank's post-fusion state. Must be safe to call concurrently.
template <typename T>
using RankFusionProbe =
    std::function<void(int rank, int layer, const Tensor<T>& state)>;

// Track parallelism: track i runs on device i with no communication inside a
// block; every D layers the tracks all-reduce and continue from the fused
// state. Logits are computed once from the fused output on rank 0. The mesh
// trace is cleared first, so the returned stats cover this run only.
template <typename T>
MeshRunResult<T> RunPtParallel(std::span<const int> tokens,
                               const PTConfig& cfg, const PTWeightSet<T>& w,
                               Mesh<T>& mesh,
                               const RankFusionProbe<T>& probe = {});

}  // namespace ptsim

#endif  // PTSIM_TRACK_PARALLEL_H_
