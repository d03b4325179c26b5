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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracle/reference_oracle.h"
#include "ptsim/errors.h"
#include "ptsim/kernels.h"
#include "ptsim/transformer.h"
#include "test_util.h"

namespace ptsim {
namespace {

ModelConfig Tiny() { return MakeModelConfig(16, 2, 4, 2, 24, 12); }

TEST(ModelConfigTest, Validation) {
  ModelConfig c = Tiny();
  EXPECT_NO_THROW(c.Validate());
  c.n_kv_heads = 3;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Tiny();
  c.d_model = 17;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Tiny();
  c.max_seq = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(ModelConfigTest, DefaultFfnWidth) {
  EXPECT_EQ(DefaultFfnWidth(32), 88);   // ceil(256/3) = 86 -> 88
  EXPECT_EQ(DefaultFfnWidth(48), 128);  // 128 exactly
}

TEST(LayerForwardTest, ZeroWeightsPassResidualThrough) {
  const ModelConfig cfg = Tiny();
  const auto w = MakeZeroWeightSet<double>(cfg);
  const auto h = SeededInit<double>({5, 16}, 3, 1.0);
  const auto pos = Positions(5);
  EXPECT_EQ(LayerForward(h, w.layers[0], cfg, pos), h);
}

TEST(LayerForwardTest, ShapeErrors) {
  const ModelConfig cfg = Tiny();
  const auto w = MakeWeightSet<double>(cfg, 1);
  const auto pos = Positions(3);
  EXPECT_THROW(LayerForward(Tensor<double>({3, 8}), w.layers[0], cfg, pos),
               DimensionError);
  const auto long_pos = Positions(13);
  EXPECT_THROW(LayerForward(Tensor<double>({13, 16}), w.layers[0], cfg, long_pos),
               DimensionError);
}

// Plain multi-head attention with one K/V head per query head.
std::vector<double> MhaOracle(const Tensor<double>& x, const Tensor<double>& wq,
                              const Tensor<double>& wk, const Tensor<double>& wv,
                              int heads, int hd) {
  const std::size_t seq = x.dim(0), d = x.dim(1), w = heads * hd;
  auto proj = [&](const Tensor<double>& m) {
    return oracle::MatMul<double>({x.data().begin(), x.data().end()},
                                  {m.data().begin(), m.data().end()}, seq, d, w);
  };
  auto q = proj(wq), k = proj(wk), v = proj(wv);
  oracle::Rotate(q, seq, heads, hd, 10000.0);
  oracle::Rotate(k, seq, heads, hd, 10000.0);
  std::vector<double> out(seq * w);
  for (std::size_t h = 0; h < std::size_t(heads); ++h) {
    for (std::size_t i = 0; i < seq; ++i) {
      std::vector<double> s(i + 1);
      double mx = -INFINITY, z = 0;
      for (std::size_t j = 0; j <= i; ++j) {
        double dot = 0;
        for (int e = 0; e < hd; ++e) dot += q[i * w + h * hd + e] * k[j * w + h * hd + e];
        s[j] = dot / std::sqrt(double(hd));
        mx = std::max(mx, s[j]);
      }
      for (double& sj : s) z += (sj = std::exp(sj - mx));
      for (int e = 0; e < hd; ++e) {
        double acc = 0;
        for (std::size_t j = 0; j <= i; ++j) acc += s[j] / z * v[j * w + h * hd + e];
        out[i * w + h * hd + e] = acc;
      }
    }
  }
  return out;
}

TEST(AttentionTest, FullKvHeadsMatchMhaOracle) {
  const int heads = 4, hd = 4, d = 16, seq = 7;
  const auto x = SeededInit<double>({seq, d}, 1, 1.0);
  const auto wq = SeededInit<double>({d, heads * hd}, 2, 0.25);
  const auto wk = SeededInit<double>({d, heads * hd}, 3, 0.25);
  const auto wv = SeededInit<double>({d, heads * hd}, 4, 0.25);
  const auto got =
      CausalAttention(x, wq, wk, wv, heads, heads, hd, Positions(seq), 10000.0);
  const auto want = MhaOracle(x, wq, wk, wv, heads, hd);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

template <typename T>
void ExpectGqaEqualsDuplicatedKv(double tol) {
  // GQA with 2 KV heads for 4 query heads equals MHA whose K/V columns
  // duplicate each KV head across its group.
  const int heads = 4, kv = 2, hd = 4, d = 16, seq = 6;
  const auto x = SeededInit<T>({seq, d}, 5, 1.0);
  const auto wq = SeededInit<T>({d, heads * hd}, 6, 0.25);
  const auto wk = SeededInit<T>({d, kv * hd}, 7, 0.25);
  const auto wv = SeededInit<T>({d, kv * hd}, 8, 0.25);
  auto dup = [&](const Tensor<T>& m) {
    Tensor<T> out({std::size_t(d), std::size_t(heads * hd)});
    for (int r = 0; r < d; ++r)
      for (int h = 0; h < heads; ++h)
        for (int e = 0; e < hd; ++e)
          out.at(r, h * hd + e) = m.at(r, (h / (heads / kv)) * hd + e);
    return out;
  };
  const auto gqa = CausalAttention(x, wq, wk, wv, heads, kv, hd, Positions(seq), 1e4);
  const auto mha =
      CausalAttention(x, wq, dup(wk), dup(wv), heads, heads, hd, Positions(seq), 1e4);
  EXPECT_LE(MaxRelativeDifference(gqa, mha), tol);
}

TEST(AttentionTest, GqaEqualsMhaWithDuplicatedKv) {
  ExpectGqaEqualsDuplicatedKv<double>(0.0);
  ExpectGqaEqualsDuplicatedKv<float>(1e-6);
}

TEST(DenseForwardTest, CausalityHoldsForRandomConfigs) {
  testing::RandomShapes r(99);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelConfig cfg = r.Model(r.Range(1, 3));
    const auto w = MakeWeightSet<double>(cfg, trial);
    auto tokens = r.Tokens(cfg.vocab_size);
    if (tokens.size() < 2) tokens.push_back(0);
    const auto base = DenseForward<double>(tokens, cfg, w);
    const std::size_t t = r.Range(1, int(tokens.size()) - 1);
    tokens[t] = (tokens[t] + 1) % cfg.vocab_size;
    const auto changed = DenseForward<double>(tokens, cfg, w);
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < base.dim(1); ++j) {
        ASSERT_EQ(base.at(i, j), changed.at(i, j)) << "trial " << trial;
      }
    }
    EXPECT_EQ(base.shape(), (Shape{tokens.size(), std::size_t(cfg.vocab_size)}));
    EXPECT_TRUE(AllFinite(base));
  }
}

TEST(DenseForwardTest, SingleTokenZeroLayersClosedForm) {
  const ModelConfig cfg = Tiny();
  auto w = MakeZeroWeightSet<double>(cfg);
  const auto real = MakeWeightSet<double>(cfg, 5);
  w.token_embedding = real.token_embedding;
  w.unembedding = real.unembedding;
  const int tok = 7;
  const std::vector<int> tokens = {tok};
  const auto logits = DenseForward<double>(tokens, cfg, w);
  // logits = (e / rms(e)) . U, with e the embedding row.
  double ms = 0;
  for (int j = 0; j < 16; ++j) ms += std::pow(w.token_embedding.at(tok, j), 2);
  const double inv = 1.0 / std::sqrt(ms / 16 + cfg.norm_eps);
  for (int v = 0; v < cfg.vocab_size; ++v) {
    double want = 0;
    for (int j = 0; j < 16; ++j)
      want += w.token_embedding.at(tok, j) * inv * w.unembedding.at(j, v);
    EXPECT_NEAR(logits.at(0, v), want, 1e-12);
  }
}

TEST(DenseForwardTest, MatchesStraightLineOracle) {
  testing::RandomShapes r(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelConfig cfg = r.Model(r.Range(1, 3));
    const auto tokens = r.Tokens(cfg.vocab_size);
    const auto got =
        DenseForward<double>(tokens, cfg, MakeWeightSet<double>(cfg, 100 + trial));
    const auto want = oracle::DenseLogits<double>(testing::ToDims(cfg), 100 + trial, tokens);
    EXPECT_EQ(got, Tensor<double>(got.shape(), want)) << "trial " << trial;
  }
}

TEST(DenseForwardTest, Deterministic) {
  const ModelConfig cfg = Tiny();
  const std::vector<int> tokens = {1, 2, 3, 4, 5};
  EXPECT_EQ(DenseForward<float>(tokens, cfg, MakeWeightSet<float>(cfg, 9)),
            DenseForward<float>(tokens, cfg, MakeWeightSet<float>(cfg, 9)));
}

TEST(DenseForwardTest, InputErrors) {
  const ModelConfig cfg = Tiny();
  const auto w = MakeWeightSet<double>(cfg, 1);
  const std::vector<int> bad = {1, 2, 24};
  try {
    DenseForward<double>(bad, cfg, w);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(DenseForward<double>(std::vector<int>{}, cfg, w), InputError);
  EXPECT_THROW(DenseForward<double>(std::vector<int>(13, 0), cfg, w), InputError);
  const std::vector<int> neg = {-1};
  EXPECT_THROW(DenseForward<double>(neg, cfg, w), InputError);
}

}  // namespace
}  // namespace ptsim
