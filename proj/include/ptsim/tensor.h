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

#ifndef PTSIM_TENSOR_H_
#define PTSIM_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ptsim/errors.h"

namespace ptsim {

using Shape = std::vector<std::size_t>;

std::string ShapeToString(const Shape& shape);

inline std::size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// Dense row-major tensor. The element type is the run's element width
// (float for 32-bit runs, double for 64-bit runs).
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    CheckShape();
    data_.assign(NumElements(shape_), T{0});
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    CheckShape();
    if (data_.size() != NumElements(shape_)) {
      throw DimensionError("tensor data length " +
                           std::to_string(data_.size()) +
                           " does not match shape " + ShapeToString(shape_));
    }
  }

  static Tensor Full(Shape shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Element (i, j) of a rank-2 tensor.
  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  // The i-th trailing vector, i.e. a contiguous run of shape().back()
  // elements.
  std::span<T> row(std::size_t i) {
    const std::size_t w = shape_.back();
    return std::span<T>(data_).subspan(i * w, w);
  }
  std::span<const T> row(std::size_t i) const {
    const std::size_t w = shape_.back();
    return std::span<const T>(data_).subspan(i * w, w);
  }
  std::size_t num_rows() const {
    return shape_.empty() ? 0 : data_.size() / shape_.back();
  }

  // Same data under a new shape with the same element count.
  Tensor Reshaped(Shape shape) const& {
    return Tensor(std::move(shape), data_);
  }
  Tensor Reshaped(Shape shape) && {
    return Tensor(std::move(shape), std::move(data_));
  }

  // Exact (bitwise for non-NaN values) equality of shape and contents.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void CheckShape() const {
    if (shape_.empty()) throw DimensionError("tensor shape must be non-empty");
    for (std::size_t d : shape_) {
      if (d == 0) {
        throw DimensionError("tensor dimensions must be positive, got " +
                             ShapeToString(shape_));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace ptsim

#endif  // PTSIM_TENSOR_H_
