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

#include "sact/training/optim.hpp"

#include <cmath>
#include <string>

#include "sact/errors.hpp"

namespace sact::training {

OptimizerState OptimizerState::fresh(std::span<const NamedTensor> params, AdamConfig hp) {
  OptimizerState s;
  s.hp = hp;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor->shape());
    s.v.emplace_back(p.tensor->shape());
  }
  return s;
}

void adam_step(std::span<const NamedTensor> params, OptimizerState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ShapeError("adam_step: optimizer state holds " + std::to_string(state.m.size()) + " tensors for " +
                     std::to_string(params.size()) + " parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i].tensor;
    if (!(state.m[i].shape() == p.shape()) || !(state.v[i].shape() == p.shape()))
      throw ShapeError("adam_step: state for " + params[i].name + " is " + state.m[i].shape().str() +
                       ", parameter is " + p.shape().str());
    if (p.grad().size() != p.size()) throw ShapeError("adam_step: " + params[i].name + " has no gradient buffer");
  }
  ++state.step;
  const auto& hp = state.hp;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hp.beta1, t);
  const double c2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    auto g = p.grad();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    auto w = p.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * g[k];
      v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
  }
}

double global_grad_norm(std::span<const NamedTensor> params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.tensor->grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + p.name);
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

ClipResult clip_gradients(std::span<const NamedTensor> params, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  ClipResult r;
  r.norm = global_grad_norm(params);
  if (r.norm > max_norm) {
    r.scale = max_norm / r.norm;
    for (const auto& p : params)
      for (double& g : p.tensor->grad()) g *= r.scale;
  }
  return r;
}

}  // namespace sact::training
