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

#include "ptsim/kernels.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace ptsim {

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t ordinal) {
  // Output k of a stream equals output 0 of the stream started k steps later.
  SplitMix64 rng(base + ordinal * SplitMix64::kGamma);
  return rng.Next();
}

template <typename T>
Tensor<T> SeededInit(const Shape& shape, std::uint64_t seed, double scale) {
  if (!(scale > 0.0)) throw ConfigError("seeded init scale must be positive");
  Tensor<T> out(shape);
  SplitMix64 rng(seed);
  for (T& v : out.data()) {
    const double u = rng.NextUnit();
    v = static_cast<T>((2.0 * u - 1.0) * scale);
  }
  return out;
}

namespace {

void RequireRank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw DimensionError(std::string(what) + " expects a rank-" +
                         std::to_string(rank) + " tensor, got " +
                         ShapeToString(shape));
  }
}

template <typename T>
void RequireSameShape(const Tensor<T>& a, const Tensor<T>& b,
                      const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

}  // namespace

template <typename T>
Tensor<T> Matmul(const Tensor<T>& a, const Tensor<T>& b) {
  RequireRank(a.shape(), 2, "matmul");
  RequireRank(b.shape(), 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul inner dimensions disagree: " +
                         ShapeToString(a.shape()) + " x " +
                         ShapeToString(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> c({m, n});
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  T* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T{0};
      for (std::size_t p = 0; p < k; ++p) acc += pa[i * k + p] * pb[p * n + j];
      pc[i * n + j] = acc;
    }
  }
  return c;
}

template <typename T>
void SoftmaxInPlace(std::span<T> v) {
  if (v.empty()) return;
  T max_value = v[0];
  for (std::size_t j = 1; j < v.size(); ++j) max_value = std::max(max_value, v[j]);
  T sum = T{0};
  for (T& x : v) {
    x = std::exp(x - max_value);
    sum += x;
  }
  for (T& x : v) x /= sum;
}

template <typename T>
Tensor<T> SoftmaxRows(const Tensor<T>& x) {
  Tensor<T> out = x;
  for (std::size_t r = 0; r < out.num_rows(); ++r) SoftmaxInPlace(out.row(r));
  return out;
}

template <typename T>
Tensor<T> RmsNorm(const Tensor<T>& x, const Tensor<T>& gamma, double eps) {
  if (!(eps > 0.0)) throw ConfigError("rms_norm eps must be positive");
  const std::size_t d = x.shape().back();
  if (gamma.size() != d) {
    throw DimensionError("rms_norm gain length " +
                         std::to_string(gamma.size()) +
                         " does not match trailing dimension of " +
                         ShapeToString(x.shape()));
  }
  Tensor<T> out(x.shape());
  const T teps = static_cast<T>(eps);
  const auto g = gamma.data();
  for (std::size_t r = 0; r < x.num_rows(); ++r) {
    const auto in = x.row(r);
    auto dst = out.row(r);
    T sum_sq = T{0};
    for (T v : in) sum_sq += v * v;
    const T mean = sum_sq / static_cast<T>(d);
    const T inv = T{1} / std::sqrt(mean + teps);
    for (std::size_t j = 0; j < d; ++j) dst[j] = in[j] * inv * g[j];
  }
  return out;
}

template <typename T>
Tensor<T> RopeApply(const Tensor<T>& x, std::span<const int> positions,
                    double base) {
  RequireRank(x.shape(), 3, "rope_apply");
  const std::size_t seq = x.dim(0), heads = x.dim(1), head_dim = x.dim(2);
  if (head_dim % 2 != 0) {
    throw ConfigError("rope_apply needs an even head_dim, got " +
                      std::to_string(head_dim));
  }
  if (positions.size() != seq) {
    throw DimensionError("rope_apply got " + std::to_string(positions.size()) +
                         " positions for sequence length " +
                         std::to_string(seq));
  }
  Tensor<T> out = x;
  auto data = out.data();
  for (std::size_t s = 0; s < seq; ++s) {
    const double pos = static_cast<double>(positions[s]);
    for (std::size_t i = 0; i < head_dim / 2; ++i) {
      const double freq =
          std::pow(base, -2.0 * static_cast<double>(i) /
                             static_cast<double>(head_dim));
      const double theta = pos * freq;
      const T c = static_cast<T>(std::cos(theta));
      const T sn = static_cast<T>(std::sin(theta));
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t at = (s * heads + h) * head_dim + 2 * i;
        const T x0 = data[at];
        const T x1 = data[at + 1];
        data[at] = x0 * c - x1 * sn;
        data[at + 1] = x0 * sn + x1 * c;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> Silu(const Tensor<T>& x) {
  Tensor<T> out = x;
  for (T& v : out.data()) v = v / (T{1} + std::exp(-v));
  return out;
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "add");
  Tensor<T> out = a;
  auto o = out.data();
  auto pb = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += pb[i];
  return out;
}

template <typename T>
Tensor<T> Multiply(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "multiply");
  Tensor<T> out = a;
  auto o = out.data();
  auto pb = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= pb[i];
  return out;
}

template <typename T>
Tensor<T> SliceColumns(const Tensor<T>& x, std::size_t begin,
                       std::size_t end) {
  RequireRank(x.shape(), 2, "slice_columns");
  if (begin >= end || end > x.dim(1)) {
    throw DimensionError("column slice [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of range for " +
                         ShapeToString(x.shape()));
  }
  Tensor<T> out({x.dim(0), end - begin});
  for (std::size_t i = 0; i < x.dim(0); ++i) {
    for (std::size_t j = begin; j < end; ++j) out.at(i, j - begin) = x.at(i, j);
  }
  return out;
}

template <typename T>
Tensor<T> SliceRows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  RequireRank(x.shape(), 2, "slice_rows");
  if (begin >= end || end > x.dim(0)) {
    throw DimensionError("row slice [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of range for " +
                         ShapeToString(x.shape()));
  }
  const std::size_t w = x.dim(1);
  auto src = x.data().subspan(begin * w, (end - begin) * w);
  return Tensor<T>({end - begin, w}, std::vector<T>(src.begin(), src.end()));
}

template <typename T>
Tensor<T> ConcatColumns(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const std::size_t rows = parts[0].dim(0);
  std::size_t cols = 0;
  for (const auto& p : parts) {
    RequireRank(p.shape(), 2, "concat_columns");
    if (p.dim(0) != rows) {
      throw DimensionError("concat_columns row mismatch: " +
                           ShapeToString(parts[0].shape()) + " vs " +
                           ShapeToString(p.shape()));
    }
    cols += p.dim(1);
  }
  Tensor<T> out({rows, cols});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < p.dim(1); ++j) out.at(i, offset + j) = p.at(i, j);
    }
    offset += p.dim(1);
  }
  return out;
}

template <typename T>
Tensor<T> ConcatRows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const std::size_t cols = parts[0].shape().back();
  std::vector<T> data;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    RequireRank(p.shape(), 2, "concat_rows");
    if (p.dim(1) != cols) {
      throw DimensionError("concat_rows column mismatch: " +
                           ShapeToString(parts[0].shape()) + " vs " +
                           ShapeToString(p.shape()));
    }
    data.insert(data.end(), p.data().begin(), p.data().end());
    rows += p.dim(0);
  }
  return Tensor<T>({rows, cols}, std::move(data));
}

template <typename T>
bool AllFinite(const Tensor<T>& x) {
  return std::all_of(x.data().begin(), x.data().end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
double MaxRelativeDifference(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "relative difference");
  double max_diff = 0.0, max_ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(static_cast<double>(a[i]) -
                                           static_cast<double>(b[i])));
    max_ref = std::max(max_ref, std::abs(static_cast<double>(b[i])));
  }
  if (max_diff == 0.0) return 0.0;
  return max_ref == 0.0 ? max_diff : max_diff / max_ref;
}

#define PTSIM_INSTANTIATE_KERNELS(T)                                         \
  template Tensor<T> SeededInit<T>(const Shape&, std::uint64_t, double);     \
  template Tensor<T> Matmul<T>(const Tensor<T>&, const Tensor<T>&);          \
  template void SoftmaxInPlace<T>(std::span<T>);                             \
  template Tensor<T> SoftmaxRows<T>(const Tensor<T>&);                       \
  template Tensor<T> RmsNorm<T>(const Tensor<T>&, const Tensor<T>&, double); \
  template Tensor<T> RopeApply<T>(const Tensor<T>&, std::span<const int>,    \
                                  double);                                   \
  template Tensor<T> Silu<T>(const Tensor<T>&);                              \
  template Tensor<T> Add<T>(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> Multiply<T>(const Tensor<T>&, const Tensor<T>&);        \
  template Tensor<T> SliceColumns<T>(const Tensor<T>&, std::size_t,          \
                                     std::size_t);                           \
  template Tensor<T> SliceRows<T>(const Tensor<T>&, std::size_t,             \
                                  std::size_t);                              \
  template Tensor<T> ConcatColumns<T>(std::span<const Tensor<T>>);           \
  template Tensor<T> ConcatRows<T>(std::span<const Tensor<T>>);              \
  template bool AllFinite<T>(const Tensor<T>&);                              \
  template double MaxRelativeDifference<T>(const Tensor<T>&, const Tensor<T>&);

PTSIM_INSTANTIATE_KERNELS(float)
PTSIM_INSTANTIATE_KERNELS(double)

#undef PTSIM_INSTANTIATE_KERNELS

}  // namespace ptsim
