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

#include "sact/eval/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sact/errors.hpp"
#include "sact/eval/translate.hpp"

namespace sact::eval {

using seq2seq::ModelConfig;
using seq2seq::ModelParams;

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back((80.0 + 5.0 * k) / 100.0);
  return grid;
}

void SweepConfig::validate() const {
  if (grid.empty()) throw ConfigError("sweep.grid: must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ConfigError("sweep.grid: values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("sweep.grid: values must be strictly increasing");
  }
  if (seeds.empty()) throw ConfigError("sweep.seeds: must not be empty");
  model.validate();
  train.validate();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

namespace {

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidInput("sweep csv: bad number '" + s + "'");
  return v;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void copy_values(ModelParams& from, ModelParams& to) {
  auto src = from.named();
  auto dst = to.named();
  for (std::size_t i = 0; i < src.size(); ++i)
    std::copy(src[i].tensor->data().begin(), src[i].tensor->data().end(), dst[i].tensor->data().begin());
}

SweepCell run_cell(const SweepTask& task, const SweepConfig& config, std::optional<double> tau, std::uint64_t seed) {
  SweepCell cell;
  cell.label = tau ? format_number(*tau) : std::string(kSactLabel);
  cell.tau = tau;
  cell.seed = seed;
  try {
    ModelConfig mc = config.model;
    mc.temperature = tau ? attention::TemperaturePolicy{attention::TemperatureMode::fixed, *tau}
                         : attention::TemperaturePolicy{attention::TemperatureMode::adaptive, 1.0};
    Rng init_rng = Rng(seed).split("init");
    ModelParams params = seq2seq::init_params(mc, init_rng);
    if (config.zero_controller_init) {
      for (auto& x : params.ctrl.w_context.data()) x = 0.0;
      for (auto& x : params.ctrl.u_state.data()) x = 0.0;
    }
    training::TrainConfig tc = config.train;
    tc.seed = seed;
    tc.log_path.clear();
    tc.checkpoint_dir.clear();
    if (!config.run_dir.empty()) {
      const auto dir = config.run_dir / (cell.label + "_seed" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      tc.log_path = dir / "train_log.jsonl";
      tc.checkpoint_dir = dir;
    }
    ModelParams best = params;
    training::TrainHooks hooks;
    hooks.after_eval = [&best](const training::EvalPoint& ev, ModelParams& current) {
      if (ev.improved) copy_values(current, best);
      return false;
    };
    training::OptimizerState state;
    auto result = training::train(mc, params, state, task.train, task.valid, tc, hooks);
    if (task.valid.empty() || result.best_step == result.steps) copy_values(params, best);
    cell.valid_loss = result.best_valid_loss;
    const auto hyps = greedy_translate(task.test, best, mc, tc.precision);
    cell.bleu = bleu_ids(hyps, task.test);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.bleu = std::numeric_limits<double>::quiet_NaN();
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

std::optional<double> SweepResult::median(const std::string& label) const {
  std::vector<double> v;
  for (const auto& c : cells)
    if (c.ok && c.label == label) v.push_back(c.bleu);
  if (v.empty()) return std::nullopt;
  return median_of(std::move(v));
}

std::optional<double> SweepResult::fixed_median(double tau) const { return median(format_number(tau)); }

std::optional<double> SweepResult::best_fixed_tau() const {
  std::optional<double> best_tau;
  double best = -1.0;
  for (double t : grid) {
    auto m = fixed_median(t);
    if (m && *m > best) {
      best = *m;
      best_tau = t;
    }
  }
  return best_tau;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.ok; }));
}

SweepResult sweep_temperature(const SweepTask& task, const SweepConfig& config,
                              const std::function<void(const SweepCell&)>& on_cell) {
  config.validate();
  if (task.train.empty()) throw InvalidInput("sweep: empty training set");
  if (task.test.empty()) throw InvalidInput("sweep: empty test set");
  SweepResult result;
  result.grid = config.grid;
  result.seeds = config.seeds;
  for (std::uint64_t seed : config.seeds) {
    std::vector<std::optional<double>> variants(config.grid.begin(), config.grid.end());
    variants.push_back(std::nullopt);
    for (const auto& tau : variants) {
      result.cells.push_back(run_cell(task, config, tau, seed));
      if (on_cell) on_cell(result.cells.back());
    }
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "tau,seed,bleu\n";
  for (const auto& c : result.cells)
    out += c.label + ',' + std::to_string(c.seed) + ',' + format_number(c.ok ? c.bleu : std::nan("")) + '\n';
  return out;
}

SweepResult sweep_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "tau,seed,bleu") throw InvalidInput("sweep csv: expected header tau,seed,bleu");
  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw InvalidInput("sweep csv: malformed row '" + line + "'");
    SweepCell c;
    c.label = line.substr(0, a);
    const std::string seed = line.substr(a + 1, b - a - 1);
    auto [p, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), c.seed);
    if (ec != std::errc() || p != seed.data() + seed.size()) throw InvalidInput("sweep csv: bad seed '" + seed + "'");
    c.bleu = parse_number(line.substr(b + 1));
    c.ok = !std::isnan(c.bleu);
    if (c.label != kSactLabel) {
      c.tau = parse_number(c.label);
      if (std::find(result.grid.begin(), result.grid.end(), *c.tau) == result.grid.end())
        result.grid.push_back(*c.tau);
    }
    if (std::find(result.seeds.begin(), result.seeds.end(), c.seed) == result.seeds.end())
      result.seeds.push_back(c.seed);
    result.cells.push_back(std::move(c));
  }
  std::sort(result.grid.begin(), result.grid.end());
  return result;
}

std::string median_table(const SweepResult& result) {
  std::string out = "tau      median_bleu  ok/total\n";
  auto row = [&](const std::string& label) {
    std::size_t ok = 0, total = 0;
    for (const auto& c : result.cells)
      if (c.label == label) {
        ++total;
        ok += c.ok;
      }
    const auto m = result.median(label);
    char buf[96];
    if (m)
      std::snprintf(buf, sizeof buf, "%-8s %11.2f  %zu/%zu\n", label.c_str(), *m, ok, total);
    else
      std::snprintf(buf, sizeof buf, "%-8s %11s  %zu/%zu\n", label.c_str(), "n/a", ok, total);
    out += buf;
  };
  for (double t : result.grid) row(format_number(t));
  row(std::string(kSactLabel));
  return out;
}

}  // namespace sact::eval
