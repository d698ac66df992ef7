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

#include <functional>
#include <string>
#include <vector>

#include "sact/numerics/tape.hpp"

namespace sact {

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct GroupError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GroupError> groups;
};

// Builds the loss on the given tape and returns it.
using LossFn = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients against central differences.
///
/// For every entry p of every tensor, the analytic gradient a is compared
/// with n = (f(p+eps) - f(p-eps)) / (2 eps) via |a-n| / max(1e-8, |a|+|n|).
/// The tensors get requires_grad set for the duration of the check and their
/// values are restored afterwards. Only meaningful in f64 precision; eps must
/// lie in [1e-7, 1e-4].
GradCheckReport grad_check(const LossFn& loss_fn, const std::vector<NamedTensor>& params,
                           double eps = 1e-5, Precision precision = Precision::f64);

double relative_error(double analytic, double numeric);

}  // namespace sact
