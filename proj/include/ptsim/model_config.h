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

#ifndef PTSIM_MODEL_CONFIG_H_
#define PTSIM_MODEL_CONFIG_H_

#include <cstdint>

namespace ptsim {

// Hyperparameters of one dense transformer (or of one PT track).
struct ModelConfig {
  int d_model = 0;
  int n_layers = 0;
  int n_heads = 0;
  int n_kv_heads = 0;
  int head_dim = 0;
  int d_ff = 0;
  int vocab_size = 0;
  int max_seq = 0;
  double norm_eps = 1e-5;
  double rope_base = 10000.0;

  // Throws ConfigError naming the first violated invariant.
  void Validate() const;

  int q_width() const { return n_heads * head_dim; }
  int kv_width() const { return n_kv_heads * head_dim; }
  int group_size() const { return n_heads / n_kv_heads; }

  // Parameters in the transformer layers only (no embeddings, no norms).
  std::int64_t LayerParameterCount() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// 4 * d_model * 2 / 3, rounded up to a multiple of 8.
int DefaultFfnWidth(int d_model);

// Fills head_dim = d_model / n_heads and d_ff = DefaultFfnWidth(d_model).
ModelConfig MakeModelConfig(int d_model, int n_layers, int n_heads,
                            int n_kv_heads, int vocab_size, int max_seq);

}  // namespace ptsim

#endif  // PTSIM_MODEL_CONFIG_H_
