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

// Straight-line reference used only by tests. It shares no code with the
// library: weights are regenerated from the seed scheme by hand, and every
// layer is written out as explicit loops. Loop orders follow the documented
// summation order (left to right), which is what makes bit-level comparison
// against the library meaningful.

#ifndef PTSIM_TESTS_ORACLE_REFERENCE_ORACLE_H_
#define PTSIM_TESTS_ORACLE_REFERENCE_ORACLE_H_

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline std::uint64_t SplitMixAt(std::uint64_t seed, std::uint64_t index) {
  // index-th output (0-based) of SplitMix64 seeded with `seed`, stepping the
  // state one output at a time.
  std::uint64_t state = seed;
  std::uint64_t z = 0;
  for (std::uint64_t i = 0; i <= index; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
  }
  return z;
}

struct Dims {
  int d_model, n_layers, n_heads, n_kv_heads, head_dim, d_ff, vocab;
  double eps = 1e-5;
  double rope_base = 10000.0;
};

template <typename T>
using Mat = std::vector<T>;  // row-major, dimensions carried by the caller

template <typename T>
Mat<T> Uniform(std::size_t count, std::uint64_t seed, double scale) {
  Mat<T> out(count);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < count; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    const double u = static_cast<double>(z >> 11) / 9007199254740992.0;
    out[i] = static_cast<T>((2.0 * u - 1.0) * scale);
  }
  return out;
}

template <typename T>
struct Layer {
  Mat<T> wq, wk, wv, wo, gate, up, down;
};

template <typename T>
std::vector<Layer<T>> Layers(const Dims& d, std::uint64_t base) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d.d_model));
  const std::size_t dm = d.d_model, q = d.n_heads * d.head_dim,
                    kv = d.n_kv_heads * d.head_dim, ff = d.d_ff;
  std::vector<Layer<T>> out;
  for (int l = 0; l < d.n_layers; ++l) {
    auto seed = [&](int j) { return SplitMixAt(base, 2 + 7 * l + j); };
    out.push_back(Layer<T>{
        Uniform<T>(dm * q, seed(0), scale), Uniform<T>(dm * kv, seed(1), scale),
        Uniform<T>(dm * kv, seed(2), scale), Uniform<T>(q * dm, seed(3), scale),
        Uniform<T>(dm * ff, seed(4), scale), Uniform<T>(dm * ff, seed(5), scale),
        Uniform<T>(ff * dm, seed(6), scale)});
  }
  return out;
}

template <typename T>
Mat<T> MatMul(const Mat<T>& a, const Mat<T>& b, std::size_t m, std::size_t k,
              std::size_t n) {
  Mat<T> c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

// Unit-gain RMS norm of every row.
template <typename T>
Mat<T> Norm(const Mat<T>& x, std::size_t rows, std::size_t d, double eps) {
  Mat<T> y(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    T ss = 0;
    for (std::size_t j = 0; j < d; ++j) ss += x[r * d + j] * x[r * d + j];
    const T inv = T(1) / std::sqrt(ss / static_cast<T>(d) + static_cast<T>(eps));
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = x[r * d + j] * inv * T(1);
  }
  return y;
}

template <typename T>
void Rotate(Mat<T>& x, std::size_t seq, std::size_t heads, std::size_t hd,
            double base) {
  for (std::size_t s = 0; s < seq; ++s) {
    for (std::size_t i = 0; i < hd / 2; ++i) {
      const double theta =
          static_cast<double>(s) *
          std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(hd));
      const T c = static_cast<T>(std::cos(theta));
      const T sn = static_cast<T>(std::sin(theta));
      for (std::size_t h = 0; h < heads; ++h) {
        T& a = x[(s * heads + h) * hd + 2 * i];
        T& b = x[(s * heads + h) * hd + 2 * i + 1];
        const T a0 = a, b0 = b;
        a = a0 * c - b0 * sn;
        b = a0 * sn + b0 * c;
      }
    }
  }
}

template <typename T>
Mat<T> Block(const Mat<T>& h, const Layer<T>& w, const Dims& d,
             std::size_t seq) {
  const std::size_t dm = d.d_model, nh = d.n_heads, nkv = d.n_kv_heads,
                    hd = d.head_dim, ff = d.d_ff;
  Mat<T> x = Norm(h, seq, dm, d.eps);
  Mat<T> q = MatMul(x, w.wq, seq, dm, nh * hd);
  Mat<T> k = MatMul(x, w.wk, seq, dm, nkv * hd);
  Mat<T> v = MatMul(x, w.wv, seq, dm, nkv * hd);
  Rotate(q, seq, nh, hd, d.rope_base);
  Rotate(k, seq, nkv, hd, d.rope_base);
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));
  Mat<T> att(seq * nh * hd);
  for (std::size_t i = 0; i < seq; ++i) {
    for (std::size_t hh = 0; hh < nh; ++hh) {
      const std::size_t g = hh / (nh / nkv);
      std::vector<T> p(i + 1);
      for (std::size_t j = 0; j <= i; ++j) {
        T dot = 0;
        for (std::size_t e = 0; e < hd; ++e) {
          dot += q[(i * nh + hh) * hd + e] * k[(j * nkv + g) * hd + e];
        }
        p[j] = dot * scale;
      }
      T mx = p[0];
      for (std::size_t j = 1; j <= i; ++j) mx = p[j] > mx ? p[j] : mx;
      T sum = 0;
      for (std::size_t j = 0; j <= i; ++j) {
        p[j] = std::exp(p[j] - mx);
        sum += p[j];
      }
      for (std::size_t j = 0; j <= i; ++j) p[j] /= sum;
      for (std::size_t e = 0; e < hd; ++e) {
        T acc = 0;
        for (std::size_t j = 0; j <= i; ++j) acc += p[j] * v[(j * nkv + g) * hd + e];
        att[(i * nh + hh) * hd + e] = acc;
      }
    }
  }
  Mat<T> o = MatMul(att, w.wo, seq, nh * hd, dm);
  Mat<T> h1(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) h1[i] = h[i] + o[i];

  Mat<T> y = Norm(h1, seq, dm, d.eps);
  Mat<T> gt = MatMul(y, w.gate, seq, dm, ff);
  Mat<T> up = MatMul(y, w.up, seq, dm, ff);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = gt[i] / (T(1) + std::exp(-gt[i]));
    gt[i] = gt[i] * up[i];
  }
  Mat<T> dn = MatMul(gt, w.down, seq, ff, dm);
  Mat<T> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h1[i] + dn[i];
  return out;
}

template <typename T>
Mat<T> Embedding(const Dims& d, std::uint64_t seed) {
  return Uniform<T>(static_cast<std::size_t>(d.vocab) * d.d_model,
                    SplitMixAt(seed, 0),
                    1.0 / std::sqrt(static_cast<double>(d.d_model)));
}

template <typename T>
Mat<T> Unembedding(const Dims& d, std::uint64_t seed) {
  return Uniform<T>(static_cast<std::size_t>(d.vocab) * d.d_model,
                    SplitMixAt(seed, 1),
                    1.0 / std::sqrt(static_cast<double>(d.d_model)));
}

template <typename T>
Mat<T> Lookup(const Mat<T>& table, const std::vector<int>& tokens,
              std::size_t dm) {
  Mat<T> x(tokens.size() * dm);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = 0; j < dm; ++j) x[i * dm + j] = table[tokens[i] * dm + j];
  }
  return x;
}

template <typename T>
Mat<T> Head(const Mat<T>& h, const Dims& d, std::uint64_t seed,
            std::size_t seq) {
  return MatMul(Norm(h, seq, d.d_model, d.eps), Unembedding<T>(d, seed), seq,
                d.d_model, d.vocab);
}

// Dense model, logits [seq x vocab].
template <typename T>
Mat<T> DenseLogits(const Dims& d, std::uint64_t seed,
                   const std::vector<int>& tokens) {
  Mat<T> h = Lookup(Embedding<T>(d, seed), tokens, d.d_model);
  for (const auto& layer : Layers<T>(d, seed)) h = Block(h, layer, d, tokens.size());
  return Head(h, d, seed, tokens.size());
}

// PT model stepped exactly as the track-parallel loop: every track starts
// from the embedding, runs its layer l, and after every `depth` layers all
// tracks are summed (track 0 first) and restarted from the sum.
template <typename T>
Mat<T> PtLogits(const Dims& track, int n_tracks, int depth, std::uint64_t seed,
                const std::vector<int>& tokens) {
  const Mat<T> x = Lookup(Embedding<T>(track, seed), tokens, track.d_model);
  std::vector<std::vector<Layer<T>>> stacks;
  for (int i = 0; i < n_tracks; ++i) {
    stacks.push_back(Layers<T>(track, seed ^ static_cast<std::uint64_t>(i)));
  }
  std::vector<Mat<T>> h(n_tracks, x);
  Mat<T> fused = x;
  for (int l = 1; l <= track.n_layers; ++l) {
    for (int i = 0; i < n_tracks; ++i) {
      h[i] = Block(h[i], stacks[i][l - 1], track, tokens.size());
    }
    if (l % depth == 0) {
      fused = h[0];
      for (int i = 1; i < n_tracks; ++i) {
        for (std::size_t e = 0; e < fused.size(); ++e) fused[e] += h[i][e];
      }
      for (int i = 0; i < n_tracks; ++i) h[i] = fused;
    }
  }
  return Head(fused, track, seed, tokens.size());
}

// Prompt token i = output i of SplitMix64(seed) mod vocab.
inline std::vector<int> Prompt(std::size_t len, std::uint64_t seed, int vocab) {
  std::vector<int> t(len);
  for (std::size_t i = 0; i < len; ++i) {
    t[i] = static_cast<int>(SplitMixAt(seed, i) % static_cast<std::uint64_t>(vocab));
  }
  return t;
}

}  // namespace oracle

#endif  // PTSIM_TESTS_ORACLE_REFERENCE_ORACLE_H_
