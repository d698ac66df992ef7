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

#include "sact/attention/sact.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sact/errors.hpp"
#include "sact/numerics/ops.hpp"

namespace sact::attention {

void TemperatureController::validate() const {
  if (!(lambda > 1.0))
    throw ConfigError("temperature bound lambda must be > 1, got " + std::to_string(lambda));
  if (w_context.rank() == 0 || w_context.rows() != 1)
    throw ShapeError("W_c must be a single row, got " + w_context.shape().str());
  if (u_state.rank() == 0 || u_state.rows() != 1)
    throw ShapeError("U_s must be a single row, got " + u_state.shape().str());
}

Var compute_beta(Var prev_context, Var decoder_state, TemperatureController& ctrl) {
  ctrl.validate();
  Tape& tape = *prev_context.tape;
  if (prev_context.value().cols() != ctrl.w_context.cols())
    throw ShapeError("compute_beta: context " + prev_context.shape().str() +
                     " does not match W_c " + ctrl.w_context.shape().str());
  if (decoder_state.value().cols() != ctrl.u_state.cols())
    throw ShapeError("compute_beta: decoder state " + decoder_state.shape().str() +
                     " does not match U_s " + ctrl.u_state.shape().str());
  Var from_context = ops::matmul_nt(prev_context, tape.param(ctrl.w_context));
  Var from_state = ops::matmul_nt(decoder_state, tape.param(ctrl.u_state));
  return ops::tanh(ops::add(from_context, from_state));
}

Var compute_temperature(Var beta, double lambda) {
  if (!(lambda > 1.0))
    throw ConfigError("temperature bound lambda must be > 1, got " + std::to_string(lambda));
  Tape& tape = *beta.tape;
  const double log_lambda = std::log(lambda);
  const double lo = std::nextafter(1.0 / lambda, lambda);
  const double hi = std::nextafter(lambda, 0.0);
  const Tensor& b = beta.value();
  Tensor tau(b.shape());
  for (std::size_t i = 0; i < b.size(); ++i) {
    // tanh saturates to +-1 in floating point for large arguments; pulling
    // the result one ulp inside keeps the range open.
    tau[i] = std::clamp(std::exp(b[i] * log_lambda), lo, hi);
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(tape.size());
  return tape.push(std::move(tau), {beta}, [beta, log_lambda, out_id](Tape& t, std::span<const double> g) {
    const auto tv = t.value(Var{&t, out_id}).data();
    auto d = t.grad(beta);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * log_lambda * tv[i];
  });
}

Var attention_scores(Var decoder_state, Var encoder_states, AttentionParams& params,
                     std::span<const std::uint8_t> mask) {
  Tape& tape = *decoder_state.tape;
  const Tensor& h = encoder_states.value();
  if (h.rank() != 3)
    throw ShapeError("encoder states must be [B x n x d], got " + h.shape().str());
  const std::size_t batch = h.shape()[0];
  const std::size_t n = h.shape()[1];
  if (!mask.empty()) {
    if (mask.size() != batch * n)
      throw ShapeError("attention mask has " + std::to_string(mask.size()) + " entries for " +
                       h.shape().str());
    for (std::size_t b = 0; b < batch; ++b) {
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) any = any || mask[b * n + i];
      if (!any) throw InvalidInput("attention: every source position of row " + std::to_string(b) +
                                   " is masked");
    }
  }
  if (params.kind != ScoreKind::bilinear) throw ConfigError("unsupported attention score kind");
  // e = s W_a h: project the state once, then dot with every source position.
  Var query = ops::matmul(decoder_state, tape.param(params.w_score));
  Var scores = ops::batched_dot(encoder_states, query);
  if (!mask.empty()) scores = ops::mask_fill(scores, mask);
  return scores;
}

AttentionStep sact_attend(Var decoder_state, Var encoder_states, Var prev_context,
                          std::span<const std::uint8_t> mask, TemperatureController& ctrl,
                          AttentionParams& params, const TemperaturePolicy& policy) {
  Tape& tape = *decoder_state.tape;
  const std::size_t batch = decoder_state.value().rows();
  AttentionStep step;
  Var scores = attention_scores(decoder_state, encoder_states, params, mask);
  switch (policy.mode) {
    case TemperatureMode::adaptive:
      step.beta = compute_beta(prev_context, decoder_state, ctrl);
      step.tau = compute_temperature(step.beta, ctrl.lambda);
      step.alpha = ops::softmax_with_temperature(scores, step.tau);
      break;
    case TemperatureMode::fixed: {
      ctrl.validate();
      if (!(policy.fixed_tau > 0.0))
        throw ConfigError("fixed temperature must be positive, got " + std::to_string(policy.fixed_tau));
      const double beta = std::log(policy.fixed_tau) / std::log(ctrl.lambda);
      step.beta = tape.constant(Tensor(Shape{batch, 1}, beta));
      step.tau = tape.constant(Tensor(Shape{batch, 1}, policy.fixed_tau));
      step.alpha = ops::softmax_with_temperature(scores, step.tau);
      break;
    }
    case TemperatureMode::conventional:
      step.beta = tape.constant(Tensor(Shape{batch, 1}, 0.0));
      step.tau = tape.constant(Tensor(Shape{batch, 1}, 1.0));
      step.alpha = ops::softmax(scores);
      break;
  }
  step.context = ops::batched_weighted_sum(encoder_states, step.alpha);
  return step;
}

}  // namespace sact::attention
