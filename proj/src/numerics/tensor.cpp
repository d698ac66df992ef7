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

#include "sact/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sact/errors.hpp"

namespace sact {

namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.empty() || dims.size() > 3)
    throw ShapeError("tensor rank must be 1..3, got " + std::to_string(dims.size()));
  for (auto d : dims)
    if (d == 0) throw ShapeError("tensor extents must be positive");
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> dims)
    : Shape(std::span<const std::size_t>(dims.begin(), dims.size())) {}

Shape::Shape(std::span<const std::size_t> dims) {
  check_dims(dims);
  rank_ = dims.size();
  std::copy(dims.begin(), dims.end(), dims_.begin());
}

std::size_t Shape::numel() const {
  if (rank_ == 0) return 0;
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {
  if (shape.rank() == 0) throw ShapeError("tensor needs a shape");
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (shape.rank() == 0) throw ShapeError("tensor needs a shape");
  if (data_.size() != shape_.numel())
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (shape_.rank() == 1) return 1;
  if (shape_.rank() == 2) return shape_[0];
  throw ShapeError("rows() on rank-3 tensor " + shape_.str());
}

std::size_t Tensor::cols() const {
  if (shape_.rank() == 1) return shape_[0];
  if (shape_.rank() == 2) return shape_[1];
  throw ShapeError("cols() on rank-3 tensor " + shape_.str());
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on)
    grad_.assign(data_.size(), 0.0);
  else
    grad_.clear();
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != shape_.numel())
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  return Tensor(shape, data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace sact
