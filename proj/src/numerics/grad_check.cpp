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

#include "sact/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "sact/errors.hpp"

namespace sact {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate(const LossFn& loss_fn, Precision precision) {
  Tape tape(precision, /*record=*/false);
  const double v = loss_fn(tape).value().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss evaluated to a non-finite value");
  return v;
}

}  // namespace

GradCheckReport grad_check(const LossFn& loss_fn, const std::vector<NamedTensor>& params,
                           double eps, Precision precision) {
  if (precision != Precision::f64)
    throw ConfigError("grad_check requires 64-bit precision");
  if (!(eps >= 1e-7 && eps <= 1e-4))
    throw DomainError("grad_check: epsilon must lie in [1e-7, 1e-4]");

  std::vector<bool> had_grad;
  for (const auto& p : params) {
    had_grad.push_back(p.tensor->requires_grad());
    p.tensor->set_requires_grad(true);
    p.tensor->zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape(precision);
    Var loss = loss_fn(tape);
    if (!std::isfinite(loss.value().item()))
      throw NumericError("grad_check: loss evaluated to a non-finite value");
    tape.backward(loss);
    for (const auto& p : params) analytic.emplace_back(p.tensor->grad().begin(), p.tensor->grad().end());
  }

  GradCheckReport report;
  for (std::size_t g = 0; g < params.size(); ++g) {
    Tensor& t = *params[g].tensor;
    GroupError group{params[g].name, 0.0, t.size()};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + eps;
      const double up = evaluate(loss_fn, precision);
      t[i] = orig - eps;
      const double down = evaluate(loss_fn, precision);
      t[i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      group.max_rel_error = std::max(group.max_rel_error, relative_error(analytic[g][i], numeric));
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(std::move(group));
  }

  for (std::size_t g = 0; g < params.size(); ++g) params[g].tensor->set_requires_grad(had_grad[g]);
  return report;
}

}  // namespace sact
