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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sact/data/batch.hpp"
#include "sact/seq2seq/model.hpp"
#include "sact/training/train.hpp"

namespace sact::eval {

inline constexpr std::string_view kSactLabel = "sact";

// 0.80, 0.85, ..., 1.20
std::vector<double> default_grid();

struct SweepTask {
  std::vector<data::SentencePair> train;
  std::vector<data::SentencePair> valid;
  std::vector<data::SentencePair> test;
};

struct SweepConfig {
  seq2seq::ModelConfig model;
  training::TrainConfig train;  // seed, log_path and checkpoint_dir are set per cell
  std::vector<double> grid = default_grid();
  std::vector<std::uint64_t> seeds{1, 2, 3};
  // Start every cell with W_c = U_s = 0 (tau = 1 at step 0).
  bool zero_controller_init = false;
  // Optional per-cell run directory; cells write <dir>/<label>_seed<N>/.
  std::filesystem::path run_dir;

  void validate() const;
};

struct SweepCell {
  std::string label;  // "sact" or the fixed tau as written in the CSV
  std::optional<double> tau;  // empty for the adaptive cell
  std::uint64_t seed = 0;
  bool ok = false;
  double bleu = 0.0;
  double valid_loss = 0.0;  // best validation loss of the run
  std::string error;
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepCell> cells;  // per seed: every grid value, then sact

  std::optional<double> median(const std::string& label) const;
  std::optional<double> fixed_median(double tau) const;
  std::optional<double> sact_median() const { return median(std::string(kSactLabel)); }
  // Grid value with the highest median BLEU; ties go to the smaller tau.
  std::optional<double> best_fixed_tau() const;
  std::size_t failures() const;
};

// Shortest representation that reads back to the same double.
std::string format_number(double v);

/// Trains one fixed-tau model per grid value and one adaptive model for each
/// seed, then scores the best-validation parameters by greedy decoding and
/// BLEU on the test pairs. Every cell of a seed starts from the same initial
/// weights. A cell that throws is recorded with its message and the sweep
/// moves on. `on_cell` runs after each finished cell.
SweepResult sweep_temperature(const SweepTask& task, const SweepConfig& config,
                              const std::function<void(const SweepCell&)>& on_cell = {});

// CSV "tau,seed,bleu"; failed cells carry "nan".
std::string sweep_to_csv(const SweepResult& result);
SweepResult sweep_from_csv(const std::string& text);

// Human-readable table of per-label medians.
std::string median_table(const SweepResult& result);

}  // namespace sact::eval
