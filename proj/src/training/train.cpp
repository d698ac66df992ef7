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

#include "sact/training/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sact/data/corpus.hpp"
#include "sact/errors.hpp"
#include "sact/seq2seq/checkpoint.hpp"

namespace sact::training {

using seq2seq::ModelConfig;
using seq2seq::ModelParams;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size: must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("train.clip_norm: must be positive");
  if (eval_interval < 1) throw ConfigError("train.eval_interval: must be at least 1");
  if (!(adam.lr > 0.0)) throw ConfigError("train.lr: must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("train.beta1: must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("train.beta2: must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("train.adam_eps: must be positive");
}

std::string format_log_line(const StepLog& log) {
  nlohmann::ordered_json j;
  j["step"] = log.step;
  j["loss"] = log.loss;
  j["grad_norm"] = log.grad_norm;
  j["mean_tau"] = log.mean_tau;
  j["lr"] = log.lr;
  j["wall_ms"] = log.wall_ms;
  return j.dump();
}

double evaluate_loss(const ModelConfig& model_config, ModelParams& params, std::span<const data::SentencePair> pairs,
                     std::size_t batch_size, Precision precision) {
  if (pairs.empty()) throw InvalidInput("evaluate_loss: no sentence pairs");
  double total = 0.0;
  double tokens = 0.0;
  for (const auto& b : data::sequential_batches(pairs, batch_size)) {
    Tape tape(precision, false);
    const double loss = seq2seq::forward_loss(tape, b, params, model_config, {}).loss.value().item();
    double n = 0.0;
    for (std::size_t len : b.tgt_lengths) n += static_cast<double>(len - 1);
    total += loss * n;
    tokens += n;
  }
  return total / tokens;
}

void save_training_checkpoint(const std::filesystem::path& path, const ModelConfig& model_config,
                              ModelParams& params, const OptimizerState& state) {
  auto named = params.named();
  std::map<std::string, const Tensor*> extra;
  for (std::size_t i = 0; i < named.size() && i < state.m.size(); ++i) {
    extra["adam.m/" + named[i].name] = &state.m[i];
    extra["adam.v/" + named[i].name] = &state.v[i];
  }
  nlohmann::json meta = {{"step", state.step},
                         {"adam", {{"lr", state.hp.lr}, {"beta1", state.hp.beta1}, {"beta2", state.hp.beta2},
                                   {"eps", state.hp.eps}}}};
  seq2seq::save_checkpoint(path, model_config, params, extra, meta);
}

TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path) {
  seq2seq::Checkpoint ck = seq2seq::load_checkpoint(path);
  TrainingCheckpoint out{ck.config, std::move(ck.params), {}};
  auto named = out.params.named();
  out.state = OptimizerState::fresh(named);
  if (ck.meta.contains("adam")) {
    const auto& a = ck.meta.at("adam");
    out.state.hp = {a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                    a.at("eps").get<double>()};
    out.state.step = ck.meta.at("step").get<std::uint64_t>();
    for (std::size_t i = 0; i < named.size(); ++i) {
      auto m = ck.extra.find("adam.m/" + named[i].name);
      auto v = ck.extra.find("adam.v/" + named[i].name);
      if (m == ck.extra.end() || v == ck.extra.end())
        throw IoError(path.string() + ": optimizer state for " + named[i].name + " missing");
      if (!(m->second.shape() == named[i].tensor->shape()) || !(v->second.shape() == named[i].tensor->shape()))
        throw ShapeError("checkpoint optimizer state for " + named[i].name + " has the wrong shape");
      out.state.m[i] = m->second;
      out.state.v[i] = v->second;
    }
  }
  return out;
}

TrainResult train(const ModelConfig& model_config, ModelParams& params, OptimizerState& state,
                  std::span<const data::SentencePair> train_pairs, std::span<const data::SentencePair> valid_pairs,
                  const TrainConfig& config, const TrainHooks& hooks) {
  model_config.validate();
  config.validate();
  if (train_pairs.empty()) throw InvalidInput("train: empty training set");
  auto named = params.named();
  if (state.step == 0) state = OptimizerState::fresh(named, config.adam);
  for (auto& p : named) p.tensor->set_requires_grad(true);

  const Rng root(config.seed);
  const Rng shuffle_root = root.split("shuffle");
  const Rng dropout_root = root.split("dropout");

  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path, state.step > 0 ? std::ios::app : std::ios::trunc);
    if (!log_file) throw IoError("cannot write run log " + config.log_path.string());
  }
  if (!config.checkpoint_dir.empty()) std::filesystem::create_directories(config.checkpoint_dir);

  TrainResult result;
  result.best_valid_loss = std::numeric_limits<double>::infinity();
  const auto best_path = config.checkpoint_dir / "best.ckpt";
  if (!config.checkpoint_dir.empty() && state.step > 0 && std::filesystem::exists(best_path)) {
    auto best = seq2seq::load_checkpoint(best_path);
    if (best.meta.contains("valid_loss")) {
      result.best_valid_loss = best.meta.at("valid_loss").get<double>();
      result.best_step = best.meta.value("step", std::size_t{0});
    }
  }

  auto validate_now = [&](std::size_t step) {
    EvalPoint ev{step, 0.0, false};
    if (valid_pairs.empty()) return ev;
    ev.valid_loss = evaluate_loss(model_config, params, valid_pairs, config.batch_size, config.precision);
    if (ev.valid_loss < result.best_valid_loss) {
      ev.improved = true;
      result.best_valid_loss = ev.valid_loss;
      result.best_step = step;
      if (!config.checkpoint_dir.empty())
        seq2seq::save_checkpoint(best_path, model_config, params, {}, {{"step", step}, {"valid_loss", ev.valid_loss}});
    }
    result.evals.push_back(ev);
    return ev;
  };

  std::vector<std::vector<std::size_t>> plan;
  std::size_t plan_epoch = std::numeric_limits<std::size_t>::max();
  std::size_t per_epoch = 0;
  {
    Rng probe = shuffle_root.split(0);
    per_epoch = data::plan_batches(train_pairs, config.batch_size, probe).size();
  }

  std::size_t last_eval = state.step;
  while (state.step < config.max_steps) {
    const std::size_t s = static_cast<std::size_t>(state.step);
    const std::size_t epoch = s / per_epoch;
    if (config.epochs && epoch >= config.epochs) break;
    if (epoch != plan_epoch) {
      Rng r = shuffle_root.split(epoch);
      plan = data::plan_batches(train_pairs, config.batch_size, r);
      plan_epoch = epoch;
    }
    std::vector<data::SentencePair> rows;
    for (std::size_t i : plan[s % per_epoch]) rows.push_back(train_pairs[i]);
    const data::Batch batch = data::make_batch(rows);

    const auto t0 = std::chrono::steady_clock::now();
    for (auto& p : named) p.tensor->zero_grad();
    Tape tape(config.precision);
    Rng drop = dropout_root.split(s);
    seq2seq::LossOutput out;
    try {
      out = seq2seq::forward_loss(tape, batch, params, model_config, {true, &drop});
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(s + 1) + ": " + e.what());
    }
    const double loss = out.loss.value().item();
    if (!std::isfinite(loss)) throw NumericError("step " + std::to_string(s + 1) + ": non-finite loss");
    tape.backward(out.loss);
    ClipResult clip;
    try {
      clip = clip_gradients(named, config.clip_norm);
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(s + 1) + ": " + e.what());
    }
    adam_step(named, state);
    const auto t1 = std::chrono::steady_clock::now();

    StepLog entry{static_cast<std::size_t>(state.step), loss, clip.norm, out.mean_tau, state.hp.lr,
                  config.record_wall_time ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0};
    if (log_file.is_open()) log_file << format_log_line(entry) << '\n';
    result.log.push_back(entry);

    if (state.step % config.eval_interval == 0) {
      last_eval = state.step;
      EvalPoint ev = validate_now(state.step);
      if (hooks.after_eval && hooks.after_eval(ev, params)) {
        result.stopped_early = true;
        break;
      }
    }
  }
  if (last_eval != state.step) validate_now(state.step);
  result.steps = state.step;
  if (!config.checkpoint_dir.empty())
    save_training_checkpoint(config.checkpoint_dir / "last.ckpt", model_config, params, state);
  for (auto& p : named) p.tensor->set_requires_grad(false);
  return result;
}

}  // namespace sact::training
