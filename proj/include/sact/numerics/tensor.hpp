// Copyright 2026 The SACT-NMT Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sact {

/// Dimensions of a dense tensor. Rank is 1 to 3 and every extent is
/// positive.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::span<const std::size_t> dims);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
  std::size_t numel() const;

  std::span<const std::size_t> dims() const { return {dims_.data(), rank_}; }
  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ && a.dims_ == b.dims_;
  }

 private:
  std::array<std::size_t, 3> dims_{0, 0, 0};
  std::size_t rank_ = 0;
};

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// The gradient buffer exists exactly when requires_grad() is true and always
/// has the same number of entries as the data. Tensors that take part in a
/// Tape as parameters accumulate their adjoints into that buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.rank(); }
  bool empty() const { return data_.empty(); }

  // Rank-2 convenience; a rank-1 tensor reads as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const double& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on);
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }
  void zero_grad();

  // Same data viewed under a new shape with identical element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

}  // namespace sact
