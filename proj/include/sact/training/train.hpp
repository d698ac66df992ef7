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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sact/data/batch.hpp"
#include "sact/seq2seq/model.hpp"
#include "sact/training/optim.hpp"

namespace sact::training {

struct TrainConfig {
  std::size_t batch_size = 64;
  double clip_norm = 10.0;
  // Total optimizer steps, counted from step 0 (a resumed run stops at the
  // same step count as an uninterrupted one).
  std::size_t max_steps = 1000;
  // Optional cap on passes over the data; 0 = bounded by max_steps only.
  std::size_t epochs = 0;
  std::size_t eval_interval = 100;
  std::uint64_t seed = 42;
  Precision precision = Precision::f64;
  AdamConfig adam;
  // Write the measured step time into the run log; off makes the log a pure
  // function of seed, config and data.
  bool record_wall_time = false;
  std::filesystem::path log_path;        // JSON lines; empty = no file
  std::filesystem::path checkpoint_dir;  // best.ckpt and last.ckpt; empty = none

  // Throws ConfigError naming the first bad field.
  void validate() const;
};

struct StepLog {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping
  double mean_tau = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

// One JSON object: {"step", "loss", "grad_norm", "mean_tau", "lr", "wall_ms"}.
std::string format_log_line(const StepLog& log);

struct EvalPoint {
  std::size_t step = 0;
  double valid_loss = 0.0;
  bool improved = false;
};

struct TrainHooks {
  // Called after every validation; returning true ends training early.
  std::function<bool(const EvalPoint&, seq2seq::ModelParams&)> after_eval;
};

struct TrainResult {
  std::vector<StepLog> log;
  std::vector<EvalPoint> evals;
  std::size_t steps = 0;  // optimizer step reached
  double best_valid_loss = 0.0;
  std::size_t best_step = 0;
  bool stopped_early = false;
};

/// Deterministic training driver.
///
/// Step s uses batch s mod B of epoch s div B (B batches per epoch), with the
/// epoch order drawn from the stream split("shuffle").split(epoch) of the
/// seed and dropout masks from split("dropout").split(s). The schedule is a
/// function of the step number alone, so resuming at step k from a
/// checkpoint holding the parameters and optimizer state reproduces the
/// uninterrupted run.
///
/// Each step: forward_loss, backward, clip_gradients, adam_step. Every
/// eval_interval steps (and at the end) the validation loss is measured;
/// the best parameters are kept in checkpoint_dir/best.ckpt and the final
/// state in checkpoint_dir/last.ckpt. Throws NumericError naming the step on
/// a non-finite loss or gradient.
TrainResult train(const seq2seq::ModelConfig& model_config, seq2seq::ModelParams& params, OptimizerState& state,
                  std::span<const data::SentencePair> train_pairs, std::span<const data::SentencePair> valid_pairs,
                  const TrainConfig& config, const TrainHooks& hooks = {});

// Token-weighted mean loss without dropout.
double evaluate_loss(const seq2seq::ModelConfig& model_config, seq2seq::ModelParams& params,
                     std::span<const data::SentencePair> pairs, std::size_t batch_size,
                     Precision precision = Precision::f64);

// Saves parameters together with the Adam moments and step.
void save_training_checkpoint(const std::filesystem::path& path, const seq2seq::ModelConfig& model_config,
                              seq2seq::ModelParams& params, const OptimizerState& state);

struct TrainingCheckpoint {
  seq2seq::ModelConfig config;
  seq2seq::ModelParams params;
  OptimizerState state;
};

// Restores the optimizer state when present, else a fresh state at step 0.
TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path);

}  // namespace sact::training
