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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sact/attention/sact.hpp"
#include "sact/data/batch.hpp"
#include "sact/numerics/grad_check.hpp"
#include "sact/numerics/rng.hpp"
#include "sact/numerics/tape.hpp"

/// Attention-based encoder-decoder.
///
/// Encoder: bidirectional LSTM over source embeddings; position i yields
/// [h_fwd_i ; h_bwd_i] of width 2H. Decoder: unidirectional LSTM over target
/// embeddings (no input feeding), SACT attention, and the readout
///
///     logits = W_vocab * tanh(W_out * [ctx_t ; s_t])
///
/// The decoder starts from s_0.h = tanh(W_bridge [h_fwd_n ; h_bwd_1]),
/// s_0.c = 0 and ctx_0 = W_ctx0 s_0.h. All weights are stored output-major
/// ([out x in]) and applied as x W^T.
namespace sact::seq2seq {

struct ModelConfig {
  std::size_t src_vocab_size = 0;
  std::size_t tgt_vocab_size = 0;
  std::size_t embed_dim = 512;
  std::size_t hidden_dim = 512;
  double lambda = 4.0;
  double dropout_rate = 0.3;
  // Greedy and beam decoding stop after factor * src_len + offset steps.
  std::size_t max_decode_factor = 2;
  std::size_t max_decode_offset = 10;
  attention::ScoreKind score_kind = attention::ScoreKind::bilinear;
  attention::TemperaturePolicy temperature;

  // Throws ConfigError naming the first bad field.
  void validate() const;
  std::size_t decode_cap(std::size_t src_len) const {
    return max_decode_factor * src_len + max_decode_offset;
  }
};

// Gate rows are ordered input, forget, candidate, output; each block has H rows.
struct LstmParams {
  Tensor w_ih;  // [4H x in]
  Tensor w_hh;  // [4H x H]
  Tensor bias;  // [4H]
};

struct ModelParams {
  Tensor src_embed;  // [V_src x E]
  Tensor tgt_embed;  // [V_tgt x E]
  LstmParams enc_fwd;
  LstmParams enc_bwd;
  LstmParams dec;
  attention::AttentionParams attn;       // W_a [H x 2H]
  attention::TemperatureController ctrl;  // W_c [1 x 2H], U_s [1 x H]
  Tensor bridge;    // [H x 2H]
  Tensor ctx0;      // [2H x H]
  Tensor readout;   // [H x 3H]
  Tensor vocab;     // [V_tgt x H]

  // Every learnable tensor in checkpoint manifest order.
  std::vector<NamedTensor> named();
  // Zero-filled tensors of the shapes implied by `config`.
  static ModelParams zeros(const ModelConfig& config);
};

// Uniform(-0.08, 0.08) weights, zero biases, forget-gate bias +1.
ModelParams init_params(const ModelConfig& config, Rng& rng);

// Walks two parameter sets in manifest order; throws ShapeError naming the
// first tensor whose shape differs.
void check_same_shapes(ModelParams& expected, ModelParams& actual);

struct LstmState {
  Var h;  // [B x H]
  Var c;  // [B x H]
};

// Dropout needs a generator only when training with a positive rate.
struct RunMode {
  bool training = false;
  Rng* rng = nullptr;
};

LstmState lstm_cell(Var x, const LstmState& prev, LstmParams& gates);

struct EncoderOutput {
  Var states;  // [B x n x 2H]
  Var fwd_final;  // forward state at each row's last real token
  Var bwd_first;  // backward state at position 0
  std::vector<std::uint8_t> mask;  // [B x n]
  std::size_t batch = 0;
  std::size_t length = 0;
};

// `src` is [batch x length] row-major, padded with PAD where mask is 0.
// Every row needs at least one real token and padding only at the end.
EncoderOutput encode(Tape& tape, std::span<const int> src, std::span<const std::uint8_t> mask,
                     std::size_t batch, ModelParams& params, const ModelConfig& config,
                     const RunMode& mode);

struct DecoderInit {
  LstmState state;
  Var context;  // [B x 2H]
};

DecoderInit init_decoder(const EncoderOutput& enc, ModelParams& params);

struct DecoderStepOutput {
  Var logits;  // [B x V_tgt]
  LstmState state;
  attention::AttentionStep attention;
};

DecoderStepOutput decode_step(std::span<const int> prev_ids, const LstmState& state, Var prev_context,
                              const EncoderOutput& enc, ModelParams& params, const ModelConfig& config,
                              const RunMode& mode);

struct LossOutput {
  Var loss;
  // tau for each unmasked (row, target position), row-major over the batch.
  std::vector<double> taus;
  double mean_tau = 0.0;
};

// Teacher-forced masked mean cross-entropy over all target positions after BOS.
LossOutput forward_loss(Tape& tape, const data::Batch& batch, ModelParams& params,
                        const ModelConfig& config, const RunMode& mode);

struct DecodeResult {
  std::vector<int> ids;  // without BOS/EOS
  // Per decoding step, including the step that produced EOS.
  std::vector<std::vector<double>> alpha;
  std::vector<double> tau;
  std::vector<double> beta;
  // Mean log-probability per emitted token, EOS included when emitted.
  double mean_logprob = 0.0;
};

// `max_steps` overrides the configured length cap.
DecodeResult greedy_decode(std::span<const int> src, ModelParams& params, const ModelConfig& config,
                           std::optional<std::size_t> max_steps = std::nullopt,
                           Precision precision = Precision::f64);

struct BeamResult {
  std::vector<int> ids;
  double mean_logprob = 0.0;
};

// Length-normalised beam search. Throws ConfigError when beam_size < 1.
BeamResult beam_decode(std::span<const int> src, ModelParams& params, const ModelConfig& config,
                       std::size_t beam_size, std::optional<std::size_t> max_steps = std::nullopt,
                       Precision precision = Precision::f64);

// Row-wise log-softmax of a logit row, computed from the max-shifted values.
std::vector<double> log_softmax(std::span<const double> logits);

}  // namespace sact::seq2seq
