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

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "sact/numerics/tensor.hpp"

namespace sact {

/// Arithmetic width used by the matrix kernels. f64 is the verification
/// mode; f32 runs the products in single precision and is never used for
/// gradient checking.
enum class Precision { f64, f32 };

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape != nullptr; }
};

/// Reverse-mode tape.
///
/// Every differentiable operation appends one node holding its forward value
/// and a closure that pushes the node's adjoint onto its operands. backward()
/// replays the closures in reverse recording order, visiting each node at
/// most once. Parameter leaves reference caller-owned tensors and accumulate
/// into their grad buffers, so repeated backward calls add up.
class Tape {
 public:
  using Adjoint = std::function<void(Tape&, std::span<const double> out_grad)>;

  explicit Tape(Precision precision = Precision::f64, bool record = true);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Precision precision() const { return precision_; }
  // A non-recording tape evaluates forward values only.
  bool recording() const { return record_; }

  Var constant(Tensor value);
  // The tensor must outlive the tape. Gradients flow into it only when it
  // has requires_grad set and the tape is recording.
  Var param(Tensor& p);

  // Appends an operation node. `adjoint` is dropped when no input needs a
  // gradient.
  Var push(Tensor value, std::initializer_list<Var> inputs, Adjoint adjoint);
  Var push(Tensor value, std::span<const Var> inputs, Adjoint adjoint);

  const Tensor& value(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  // Gradient buffer of a node, allocated (zeroed) on first access.
  std::span<double> grad(Var v);
  // Gradient of a node after backward(); empty if nothing flowed into it.
  std::span<const double> grad_of(Var v) const { return nodes_[v.id].grad; }

  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Test hook: multiplies every adjoint flowing into parameter `p` by
  // `scale`. Used to check that the gradient checker catches broken adjoints.
  void inject_param_fault(const Tensor* p, double scale) { faults_[p] = scale; }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* param = nullptr;
    std::vector<double> grad;
    Adjoint adjoint;
    bool needs_grad = false;
  };

  void check_owner(Var v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Tensor*, double> faults_;
  Precision precision_;
  bool record_;
};

}  // namespace sact
