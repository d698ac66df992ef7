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

#include "sact/seq2seq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sact/errors.hpp"
#include "sact/numerics/ops.hpp"

namespace sact::seq2seq {

namespace {

constexpr double kInitRange = 0.08;

LstmParams zero_lstm(std::size_t in, std::size_t hidden) {
  return {Tensor(Shape{4 * hidden, in}), Tensor(Shape{4 * hidden, hidden}), Tensor(Shape{4 * hidden})};
}

void fill_uniform(Tensor& t, Rng& rng) {
  for (double& v : t.data()) v = rng.uniform(-kInitRange, kInitRange);
}

std::vector<std::uint8_t> column(std::span<const std::uint8_t> m, std::size_t rows, std::size_t cols,
                                 std::size_t c) {
  std::vector<std::uint8_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = m[r * cols + c];
  return out;
}

std::vector<int> column(std::span<const int> m, std::size_t rows, std::size_t cols, std::size_t c) {
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = m[r * cols + c];
  return out;
}

bool all_set(std::span<const std::uint8_t> flags) {
  return std::all_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f != 0; });
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("model." + field + ": " + why);
  };
  if (src_vocab_size <= static_cast<std::size_t>(data::kNumReserved))
    fail("src_vocab_size", "must exceed the 4 reserved ids");
  if (tgt_vocab_size <= static_cast<std::size_t>(data::kNumReserved))
    fail("tgt_vocab_size", "must exceed the 4 reserved ids");
  if (embed_dim == 0) fail("embed_dim", "must be positive");
  if (hidden_dim == 0) fail("hidden_dim", "must be positive");
  if (!(lambda > 1.0)) fail("lambda", "must be > 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout", "must lie in [0, 1)");
  if (temperature.mode == attention::TemperatureMode::fixed && !(temperature.fixed_tau > 0.0))
    fail("fixed_tau", "must be positive");
  if (score_kind != attention::ScoreKind::bilinear) fail("score", "only bilinear is supported");
}

std::vector<NamedTensor> ModelParams::named() {
  return {
      {"src_embed", &src_embed},         {"tgt_embed", &tgt_embed},
      {"enc_fwd.W_ih", &enc_fwd.w_ih},   {"enc_fwd.W_hh", &enc_fwd.w_hh},
      {"enc_fwd.bias", &enc_fwd.bias},   {"enc_bwd.W_ih", &enc_bwd.w_ih},
      {"enc_bwd.W_hh", &enc_bwd.w_hh},   {"enc_bwd.bias", &enc_bwd.bias},
      {"dec.W_ih", &dec.w_ih},           {"dec.W_hh", &dec.w_hh},
      {"dec.bias", &dec.bias},           {"attn.W_a", &attn.w_score},
      {"sact.W_c", &ctrl.w_context},     {"sact.U_s", &ctrl.u_state},
      {"bridge.W", &bridge},             {"bridge.W_ctx0", &ctx0},
      {"readout.W", &readout},           {"vocab.W", &vocab},
  };
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  const std::size_t e = config.embed_dim;
  const std::size_t h = config.hidden_dim;
  ModelParams p;
  p.src_embed = Tensor(Shape{config.src_vocab_size, e});
  p.tgt_embed = Tensor(Shape{config.tgt_vocab_size, e});
  p.enc_fwd = zero_lstm(e, h);
  p.enc_bwd = zero_lstm(e, h);
  p.dec = zero_lstm(e, h);
  p.attn.kind = config.score_kind;
  p.attn.w_score = Tensor(Shape{h, 2 * h});
  p.ctrl.w_context = Tensor(Shape{1, 2 * h});
  p.ctrl.u_state = Tensor(Shape{1, h});
  p.ctrl.lambda = config.lambda;
  p.bridge = Tensor(Shape{h, 2 * h});
  p.ctx0 = Tensor(Shape{2 * h, h});
  p.readout = Tensor(Shape{h, 3 * h});
  p.vocab = Tensor(Shape{config.tgt_vocab_size, h});
  return p;
}

ModelParams init_params(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p = ModelParams::zeros(config);
  for (auto& [name, t] : p.named()) {
    if (name.ends_with(".bias")) continue;
    fill_uniform(*t, rng);
  }
  const std::size_t h = config.hidden_dim;
  for (LstmParams* l : {&p.enc_fwd, &p.enc_bwd, &p.dec})
    for (std::size_t i = h; i < 2 * h; ++i) l->bias[i] = 1.0;
  return p;
}

void check_same_shapes(ModelParams& expected, ModelParams& actual) {
  auto a = expected.named();
  auto b = actual.named();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].tensor->shape() == b[i].tensor->shape()))
      throw ShapeError("parameter " + a[i].name + ": expected " + a[i].tensor->shape().str() +
                       ", found " + b[i].tensor->shape().str());
}

LstmState lstm_cell(Var x, const LstmState& prev, LstmParams& gates) {
  Tape& tape = *x.tape;
  const std::size_t h = gates.w_hh.cols();
  if (x.value().cols() != gates.w_ih.cols())
    throw ShapeError("lstm_cell: input " + x.shape().str() + " does not match W_ih " +
                     gates.w_ih.shape().str());
  if (prev.h.value().cols() != h || prev.c.value().cols() != h || prev.h.value().rows() != x.value().rows())
    throw ShapeError("lstm_cell: state " + prev.h.shape().str() + " does not match W_hh " +
                     gates.w_hh.shape().str());
  Var z = ops::add_row(ops::add(ops::matmul_nt(x, tape.param(gates.w_ih)),
                                ops::matmul_nt(prev.h, tape.param(gates.w_hh))),
                       tape.param(gates.bias));
  Var i = ops::sigmoid(ops::slice_cols(z, 0, h));
  Var f = ops::sigmoid(ops::slice_cols(z, h, h));
  Var g = ops::tanh(ops::slice_cols(z, 2 * h, h));
  Var o = ops::sigmoid(ops::slice_cols(z, 3 * h, h));
  Var c = ops::add(ops::mul(f, prev.c), ops::mul(i, g));
  return {ops::mul(o, ops::tanh(c)), c};
}

EncoderOutput encode(Tape& tape, std::span<const int> src, std::span<const std::uint8_t> mask,
                     std::size_t batch, ModelParams& params, const ModelConfig& config,
                     const RunMode& mode) {
  if (batch == 0 || src.empty()) throw InvalidInput("encode: empty source");
  if (src.size() % batch != 0 || mask.size() != src.size())
    throw ShapeError("encode: " + std::to_string(src.size()) + " ids and " + std::to_string(mask.size()) +
                     " mask entries for batch " + std::to_string(batch));
  const std::size_t n = src.size() / batch;
  const std::size_t h = config.hidden_dim;
  for (std::size_t b = 0; b < batch; ++b) {
    if (!mask[b * n]) throw InvalidInput("encode: empty source sentence in row " + std::to_string(b));
    for (std::size_t i = 1; i < n; ++i)
      if (mask[b * n + i] && !mask[b * n + i - 1])
        throw InvalidInput("encode: padding before a real token in row " + std::to_string(b));
  }

  Var table = tape.param(params.src_embed);
  std::vector<Var> emb(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto ids = column(src, batch, n, t);
    emb[t] = ops::dropout(ops::gather_rows(table, ids), config.dropout_rate, mode.training, *mode.rng);
  }

  // Padded steps keep the previous state, so the forward pass ends on each
  // row's last real token and the backward pass starts there.
  auto run = [&](LstmParams& gates, bool reverse) {
    std::vector<Var> out(n);
    LstmState s{tape.constant(Tensor(Shape{batch, h})), tape.constant(Tensor(Shape{batch, h}))};
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = reverse ? n - 1 - k : k;
      LstmState next = lstm_cell(emb[t], s, gates);
      auto keep = column(mask, batch, n, t);
      if (all_set(keep)) {
        s = next;
      } else {
        s = {ops::select_rows(keep, next.h, s.h), ops::select_rows(keep, next.c, s.c)};
      }
      out[t] = s.h;
    }
    return std::make_pair(out, s.h);
  };
  auto [fwd, fwd_last] = run(params.enc_fwd, false);
  auto [bwd, bwd_last] = run(params.enc_bwd, true);

  std::vector<Var> steps(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Var parts[] = {fwd[t], bwd[t]};
    steps[t] = ops::concat_cols(parts);
  }
  EncoderOutput enc;
  enc.states = ops::stack_steps(steps);
  enc.fwd_final = fwd_last;
  enc.bwd_first = bwd_last;
  enc.mask.assign(mask.begin(), mask.end());
  enc.batch = batch;
  enc.length = n;
  return enc;
}

DecoderInit init_decoder(const EncoderOutput& enc, ModelParams& params) {
  Tape& tape = *enc.states.tape;
  const Var ends[] = {enc.fwd_final, enc.bwd_first};
  Var h0 = ops::tanh(ops::matmul_nt(ops::concat_cols(ends), tape.param(params.bridge)));
  Var c0 = tape.constant(Tensor(h0.shape()));
  Var ctx = ops::matmul_nt(h0, tape.param(params.ctx0));
  return {{h0, c0}, ctx};
}

DecoderStepOutput decode_step(std::span<const int> prev_ids, const LstmState& state, Var prev_context,
                              const EncoderOutput& enc, ModelParams& params, const ModelConfig& config,
                              const RunMode& mode) {
  Tape& tape = *prev_context.tape;
  if (prev_ids.size() != enc.batch)
    throw ShapeError("decode_step: " + std::to_string(prev_ids.size()) + " previous ids for batch " +
                     std::to_string(enc.batch));
  Var emb = ops::dropout(ops::gather_rows(tape.param(params.tgt_embed), prev_ids), config.dropout_rate,
                         mode.training, *mode.rng);
  DecoderStepOutput out;
  out.state = lstm_cell(emb, state, params.dec);
  params.ctrl.lambda = config.lambda;
  const bool padded = !all_set(enc.mask);
  out.attention = attention::sact_attend(out.state.h, enc.states, prev_context,
                                         padded ? std::span<const std::uint8_t>(enc.mask)
                                                : std::span<const std::uint8_t>{},
                                         params.ctrl, params.attn, config.temperature);
  const Var joined[] = {out.attention.context, out.state.h};
  Var hidden = ops::tanh(ops::matmul_nt(ops::concat_cols(joined), tape.param(params.readout)));
  hidden = ops::dropout(hidden, config.dropout_rate, mode.training, *mode.rng);
  out.logits = ops::matmul_nt(hidden, tape.param(params.vocab));
  return out;
}

LossOutput forward_loss(Tape& tape, const data::Batch& batch, ModelParams& params,
                        const ModelConfig& config, const RunMode& mode) {
  if (batch.size == 0 || batch.tgt_len < 2) throw InvalidInput("forward_loss: malformed batch");
  for (std::size_t b = 0; b < batch.size; ++b)
    if (batch.tgt_at(b, 0) != data::kBos) throw InvalidInput("forward_loss: target row does not start with BOS");
  EncoderOutput enc = encode(tape, batch.src, batch.src_mask, batch.size, params, config, mode);
  DecoderInit init = init_decoder(enc, params);

  const std::size_t steps = batch.tgt_len - 1;
  std::vector<Var> logits;
  std::vector<int> targets;
  std::vector<std::uint8_t> keep;
  logits.reserve(steps);
  targets.reserve(steps * batch.size);
  keep.reserve(steps * batch.size);
  LossOutput out;
  LstmState state = init.state;
  Var ctx = init.context;
  for (std::size_t t = 0; t < steps; ++t) {
    auto prev = column(std::span<const int>(batch.tgt), batch.size, batch.tgt_len, t);
    DecoderStepOutput step = decode_step(prev, state, ctx, enc, params, config, mode);
    state = step.state;
    ctx = step.attention.context;
    logits.push_back(step.logits);
    const auto& tau = step.attention.tau.value();
    for (std::size_t b = 0; b < batch.size; ++b) {
      const bool real = batch.tgt_mask[b * batch.tgt_len + t + 1] != 0;
      targets.push_back(batch.tgt_at(b, t + 1));
      keep.push_back(real ? 1 : 0);
      if (real) out.taus.push_back(tau[b]);
    }
  }
  out.loss = ops::cross_entropy(ops::concat_rows(logits), targets, keep);
  double total = 0.0;
  for (double t : out.taus) total += t;
  out.mean_tau = out.taus.empty() ? 0.0 : total / static_cast<double>(out.taus.size());
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

namespace {

std::vector<std::uint8_t> full_mask(std::size_t n) { return std::vector<std::uint8_t>(n, 1); }

void check_source(std::span<const int> src, const ModelConfig& config) {
  if (src.empty()) throw InvalidInput("decode: empty source sentence");
  for (int id : src)
    if (id < 0 || static_cast<std::size_t>(id) >= config.src_vocab_size)
      throw IndexError("decode: source id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(config.src_vocab_size));
}

}  // namespace

DecodeResult greedy_decode(std::span<const int> src, ModelParams& params, const ModelConfig& config,
                           std::optional<std::size_t> max_steps, Precision precision) {
  check_source(src, config);
  Tape tape(precision, false);
  const RunMode mode;
  const auto mask = full_mask(src.size());
  EncoderOutput enc = encode(tape, src, mask, 1, params, config, mode);
  DecoderInit init = init_decoder(enc, params);
  const std::size_t cap = max_steps.value_or(config.decode_cap(src.size()));

  DecodeResult res;
  LstmState state = init.state;
  Var ctx = init.context;
  int prev = data::kBos;
  double total = 0.0;
  for (std::size_t t = 0; t < cap; ++t) {
    const int ids[] = {prev};
    DecoderStepOutput step = decode_step(ids, state, ctx, enc, params, config, mode);
    state = step.state;
    ctx = step.attention.context;
    const auto& a = step.attention.alpha.value();
    res.alpha.emplace_back(a.data().begin(), a.data().end());
    res.tau.push_back(step.attention.tau.value()[0]);
    res.beta.push_back(step.attention.beta.value()[0]);
    const auto lp = log_softmax(step.logits.value().data());
    const std::size_t best = argmax_lowest(lp);
    total += lp[best];
    if (static_cast<int>(best) == data::kEos) break;
    res.ids.push_back(static_cast<int>(best));
    prev = static_cast<int>(best);
  }
  res.mean_logprob = res.alpha.empty() ? 0.0 : total / static_cast<double>(res.alpha.size());
  return res;
}

BeamResult beam_decode(std::span<const int> src, ModelParams& params, const ModelConfig& config,
                       std::size_t beam_size, std::optional<std::size_t> max_steps, Precision precision) {
  if (beam_size < 1) throw ConfigError("beam_size must be at least 1");
  check_source(src, config);
  Tape tape(precision, false);
  const RunMode mode;
  const auto mask = full_mask(src.size());
  EncoderOutput enc = encode(tape, src, mask, 1, params, config, mode);
  DecoderInit init = init_decoder(enc, params);
  const std::size_t cap = max_steps.value_or(config.decode_cap(src.size()));

  struct Hyp {
    std::vector<int> ids;
    LstmState state;
    Var ctx;
    double logprob = 0.0;
    std::size_t length = 0;
  };
  struct Candidate {
    std::size_t hyp;
    int token;
    double score;
    double step_lp;
  };
  std::vector<Hyp> live{{{}, init.state, init.context, 0.0, 0}};
  std::vector<Hyp> finished;

  std::size_t steps = 0;
  for (std::size_t t = 0; t < cap && !live.empty() && finished.size() < beam_size; ++t) {
    std::vector<Candidate> cands;
    std::vector<DecoderStepOutput> outs;
    outs.reserve(live.size());
    for (std::size_t k = 0; k < live.size(); ++k) {
      const int ids[] = {live[k].ids.empty() ? data::kBos : live[k].ids.back()};
      outs.push_back(decode_step(ids, live[k].state, live[k].ctx, enc, params, config, mode));
      const auto lp = log_softmax(outs.back().logits.value().data());
      for (std::size_t v = 0; v < lp.size(); ++v)
        cands.push_back({k, static_cast<int>(v), live[k].logprob + lp[v], lp[v]});
    }
    // Cumulative score first; the per-step term and then the lowest
    // hypothesis and token index break ties, which makes beam 1 follow the
    // greedy argmax exactly.
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.step_lp != b.step_lp) return a.step_lp > b.step_lp;
      if (a.hyp != b.hyp) return a.hyp < b.hyp;
      return a.token < b.token;
    });
    std::vector<Hyp> next;
    const std::size_t take = std::min(beam_size, cands.size());
    for (std::size_t j = 0; j < take; ++j) {
      const Candidate& c = cands[j];
      Hyp h;
      h.ids = live[c.hyp].ids;
      h.state = outs[c.hyp].state;
      h.ctx = outs[c.hyp].attention.context;
      h.logprob = c.score;
      h.length = live[c.hyp].length + 1;
      if (c.token == data::kEos) {
        finished.push_back(std::move(h));
      } else {
        h.ids.push_back(c.token);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    steps = t + 1;
  }
  // Hypotheses cut off by the length cap compete with the finished ones.
  if (steps == cap)
    for (Hyp& h : live) finished.push_back(std::move(h));

  const Hyp* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const Hyp& h : finished) {
    const double s = h.length ? h.logprob / static_cast<double>(h.length) : 0.0;
    if (!best || s > best_score) {
      best = &h;
      best_score = s;
    }
  }
  return {best->ids, best_score};
}

}  // namespace sact::seq2seq
