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

#include "sact/numerics/tape.hpp"

/// Self-adaptive attention temperature.
///
/// At decoding step t the controller reads the previous context vector and
/// the current decoder state and emits
///
///     beta_t = tanh(W_c * ctx_{t-1} + U_s * s_t)      in (-1, 1)
///     tau_t  = lambda ^ beta_t                        in (1/lambda, lambda)
///
/// The attention weights are softmax(e_t / tau_t) and the new context is the
/// weighted sum of encoder states. beta and tau are scalars per batch row:
/// W_c is [1 x d_ctx] and U_s is [1 x d_state].
namespace sact::attention {

/// How the attention temperature is produced.
///   adaptive      learned per step by the controller
///   fixed         a constant tau; controller weights are present but unused
///   conventional  plain softmax with no temperature at all
enum class TemperatureMode { adaptive, fixed, conventional };

struct TemperaturePolicy {
  TemperatureMode mode = TemperatureMode::adaptive;
  double fixed_tau = 1.0;
};

struct TemperatureController {
  Tensor w_context;  // W_c [1 x d_ctx]
  Tensor u_state;    // U_s [1 x d_state]
  double lambda = 4.0;

  void validate() const;
};

enum class ScoreKind { bilinear };

struct AttentionParams {
  ScoreKind kind = ScoreKind::bilinear;
  Tensor w_score;  // W_a [d_state x d_ctx]
};

/// Outputs of one attention step, all recorded on the caller's tape.
struct AttentionStep {
  Var alpha;    // [B x n]
  Var tau;      // [B x 1]
  Var beta;     // [B x 1]
  Var context;  // [B x d_ctx]
};

// [B x 1] = tanh(prev_context * W_c^T + decoder_state * U_s^T)
Var compute_beta(Var prev_context, Var decoder_state, TemperatureController& ctrl);

// lambda ^ beta via exp(beta * ln lambda). Throws ConfigError unless lambda > 1.
Var compute_temperature(Var beta, double lambda);

// e[b,i] = decoder_state[b] * W_a * encoder_states[b,i], with masked source
// positions set to ops::kMaskedScore. `mask` is [B x n] row-major, 1 = real
// token; an empty span means no padding. A row with every position masked
// is an InvalidInput error.
Var attention_scores(Var decoder_state, Var encoder_states, AttentionParams& params,
                     std::span<const std::uint8_t> mask = {});

AttentionStep sact_attend(Var decoder_state, Var encoder_states, Var prev_context,
                          std::span<const std::uint8_t> mask, TemperatureController& ctrl,
                          AttentionParams& params, const TemperaturePolicy& policy = {});

}  // namespace sact::attention
