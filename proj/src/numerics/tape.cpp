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

#include "sact/numerics/tape.hpp"

#include <limits>

#include "sact/errors.hpp"

namespace sact {

const Tensor& Var::value() const { return tape->value(*this); }

Tape::Tape(Precision precision, bool record) : precision_(precision), record_(record) {}

void Tape::check_owner(Var v) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw InvalidInput("variable does not belong to this tape");
}

Var Tape::constant(Tensor value) {
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max())
    throw InvalidInput("tape is full");
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(Tensor& p) {
  Node& n = nodes_.emplace_back();
  n.external = &p;
  if (record_ && p.requires_grad()) {
    n.param = &p;
    n.needs_grad = true;
  }
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, Adjoint adjoint) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(adjoint));
}

Var Tape::push(Tensor value, std::span<const Var> inputs, Adjoint adjoint) {
  bool any = false;
  for (const Var& in : inputs) {
    check_owner(in);
    any = any || nodes_[in.id].needs_grad;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  if (record_ && any) {
    n.needs_grad = true;
    n.adjoint = std::move(adjoint);
  }
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Var v) const {
  check_owner(v);
  const Node& n = nodes_[v.id];
  return n.external ? *n.external : n.owned;
}

std::span<double> Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(value(v).size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss);
  if (value(loss).size() != 1)
    throw ShapeError("backward() needs a scalar loss, got " + value(loss).shape().str());
  for (auto& n : nodes_) n.grad.clear();
  if (!nodes_[loss.id].needs_grad) return;

  grad(loss)[0] = 1.0;
  // Leaf adjoints are summed per parameter first and added to the parameter's
  // buffer once, so a second backward adds exactly the same amount again.
  std::vector<Tensor*> touched;
  std::unordered_map<Tensor*, std::vector<double>> pending;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.param) {
      auto [it, fresh] = pending.try_emplace(n.param);
      if (fresh) {
        it->second.assign(n.grad.size(), 0.0);
        touched.push_back(n.param);
      }
      for (std::size_t k = 0; k < n.grad.size(); ++k) it->second[k] += n.grad[k];
    } else if (n.adjoint) {
      n.adjoint(*this, n.grad);
    }
  }
  for (Tensor* p : touched) {
    double scale = 1.0;
    if (auto it = faults_.find(p); it != faults_.end()) scale = it->second;
    const auto& src = pending[p];
    auto dst = p->grad();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

}  // namespace sact
