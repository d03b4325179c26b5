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

// Deterministic dense kernels shared by every model variant.
//
// Every reduction runs in a fixed left-to-right order in the element type T,
// so results are bit-reproducible for a given element width. Nothing here is
// blocked, vectorized, or reordered.

#ifndef PTSIM_KERNELS_H_
#define PTSIM_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ptsim/tensor.h"

namespace ptsim {

// SplitMix64 generator. Identical seeds give identical streams everywhere.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    state_ += kGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double NextUnit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// The ordinal-th output (0-based) of the SplitMix64 stream seeded with base.
// Used to give every weight tensor its own seed.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t ordinal);

// Uniform values in (-scale, +scale). Draws are computed in double and then
// rounded to T, so float and double runs share the same underlying stream.
template <typename T>
Tensor<T> SeededInit(const Shape& shape, std::uint64_t seed, double scale);

// c[i,j] = sum_p a[i,p] * b[p,j], p ascending.
template <typename T>
Tensor<T> Matmul(const Tensor<T>& a, const Tensor<T>& b);

// Numerically stable softmax of one vector, in place.
template <typename T>
void SoftmaxInPlace(std::span<T> v);

// Softmax applied to every trailing vector.
template <typename T>
Tensor<T> SoftmaxRows(const Tensor<T>& x);

// y = x / sqrt(mean(x^2) + eps) * gamma over every trailing vector.
template <typename T>
Tensor<T> RmsNorm(const Tensor<T>& x, const Tensor<T>& gamma, double eps);

// Rotary embedding on x[seq, heads, head_dim]. Pair (2i, 2i+1) of a vector at
// position p is rotated by p * base^(-2i/head_dim).
template <typename T>
Tensor<T> RopeApply(const Tensor<T>& x, std::span<const int> positions,
                    double base);

// x / (1 + exp(-x)), element-wise.
template <typename T>
Tensor<T> Silu(const Tensor<T>& x);

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> Multiply(const Tensor<T>& a, const Tensor<T>& b);

// Column range [begin, end) of a rank-2 tensor.
template <typename T>
Tensor<T> SliceColumns(const Tensor<T>& x, std::size_t begin, std::size_t end);

// Row range [begin, end) of a rank-2 tensor.
template <typename T>
Tensor<T> SliceRows(const Tensor<T>& x, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> ConcatColumns(std::span<const Tensor<T>> parts);

template <typename T>
Tensor<T> ConcatRows(std::span<const Tensor<T>> parts);

template <typename T>
bool AllFinite(const Tensor<T>& x);

// max|a - b| / max|b|; 0 when both are all-zero. Shapes must agree.
template <typename T>
double MaxRelativeDifference(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace ptsim

#endif  // PTSIM_KERNELS_H_
