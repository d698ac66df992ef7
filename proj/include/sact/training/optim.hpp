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
#include <span>
#include <vector>

#include "sact/numerics/grad_check.hpp"

namespace sact::training {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per parameter tensor plus the step counter.
struct OptimizerState {
  AdamConfig hp;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static OptimizerState fresh(std::span<const NamedTensor> params, AdamConfig hp = {});
};

// One Adam update from each tensor's grad buffer:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Throws ShapeError when the state does not match the parameters.
void adam_step(std::span<const NamedTensor> params, OptimizerState& state);

struct ClipResult {
  double norm = 0.0;   // global norm before clipping
  double scale = 1.0;  // factor applied to every gradient
};

// Global L2 clipping over the union of all gradients. Throws NumericError
// naming the first parameter with a non-finite gradient.
ClipResult clip_gradients(std::span<const NamedTensor> params, double max_norm);

double global_grad_norm(std::span<const NamedTensor> params);

}  // namespace sact::training
