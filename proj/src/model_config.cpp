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

#include "ptsim/model_config.h"

#include <string>

#include "ptsim/errors.h"

namespace ptsim {

namespace {

void RequirePositive(const char* name, double value) {
  if (!(value > 0)) {
    throw ConfigError(std::string(name) + " must be positive, got " +
                      std::to_string(value));
  }
}

}  // namespace

void ModelConfig::Validate() const {
  RequirePositive("d_model", d_model);
  RequirePositive("n_layers", n_layers);
  RequirePositive("n_heads", n_heads);
  RequirePositive("n_kv_heads", n_kv_heads);
  RequirePositive("head_dim", head_dim);
  RequirePositive("d_ff", d_ff);
  RequirePositive("vocab_size", vocab_size);
  RequirePositive("max_seq", max_seq);
  RequirePositive("norm_eps", norm_eps);
  RequirePositive("rope_base", rope_base);
  if (n_heads % n_kv_heads != 0) {
    throw ConfigError("n_heads (" + std::to_string(n_heads) +
                      ") must be a multiple of n_kv_heads (" +
                      std::to_string(n_kv_heads) + ")");
  }
  if (d_model != n_heads * head_dim) {
    throw ConfigError("d_model (" + std::to_string(d_model) +
                      ") must equal n_heads * head_dim (" +
                      std::to_string(n_heads) + " * " +
                      std::to_string(head_dim) + ")");
  }
  if (head_dim % 2 != 0) {
    throw ConfigError("head_dim must be even for rotary embedding, got " +
                      std::to_string(head_dim));
  }
}

std::int64_t ModelConfig::LayerParameterCount() const {
  const std::int64_t d = d_model;
  const std::int64_t attention =
      d * q_width() + 2 * d * kv_width() + std::int64_t{q_width()} * d;
  const std::int64_t mlp = 3 * d * d_ff;
  return std::int64_t{n_layers} * (attention + mlp);
}

int DefaultFfnWidth(int d_model) {
  const int raw = (8 * d_model + 2) / 3;  // ceil(4 * d * 2 / 3)
  return (raw + 7) / 8 * 8;
}

ModelConfig MakeModelConfig(int d_model, int n_layers, int n_heads,
                            int n_kv_heads, int vocab_size, int max_seq) {
  ModelConfig cfg;
  cfg.d_model = d_model;
  cfg.n_layers = n_layers;
  cfg.n_heads = n_heads;
  cfg.n_kv_heads = n_kv_heads;
  cfg.head_dim = n_heads > 0 ? d_model / n_heads : 0;
  cfg.d_ff = DefaultFfnWidth(d_model);
  cfg.vocab_size = vocab_size;
  cfg.max_seq = max_seq;
  return cfg;
}

}  // namespace ptsim
