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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sact/data/synth.hpp"
#include "sact/seq2seq/model.hpp"
#include "sact/training/train.hpp"

/// Run configuration for the command-line tool.
///
/// The file format is flat UTF-8 text: "[section]" headers, "key = value"
/// lines, and "#" or ";" comments. Keys are addressed as "section.key";
/// a key before any header belongs to the "run" section. Flag overrides are
/// applied on top of the file in the order given.
namespace sact::cli {

enum class Command { train, translate, eval, sweep, gradcheck, synth };

struct DataPaths {
  std::filesystem::path train_src, train_tgt;
  std::filesystem::path valid_src, valid_tgt;
  std::filesystem::path test_src, test_tgt;
  std::filesystem::path src_vocab, tgt_vocab;
  bool lowercase = true;
  std::size_t max_len = 100;
  std::size_t vocab_size = 30000;
};

struct SynthOptions {
  std::optional<data::TaskKind> task;  // set = generate data instead of reading files
  std::size_t train_size = 5000;
  std::size_t valid_size = 200;
  std::size_t test_size = 200;
  std::size_t min_len = 3;
  std::size_t max_len = 10;
  std::size_t vocab_size = 16;
  std::optional<std::uint64_t> seed;  // defaults to run.seed
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = "out";
  DataPaths data;
  SynthOptions synth;
  seq2seq::ModelConfig model;  // vocabulary sizes come from the data
  training::TrainConfig train;
  bool eval_test = true;
  std::vector<double> grid;  // empty = default grid
  std::vector<std::uint64_t> seeds;  // empty = seed, seed+1, seed+2
  bool zero_controller_init = false;
  std::size_t beam = 1;
  double gradcheck_eps = 1e-4;

  // Throws ConfigError naming the first offending field. Path fields the
  // command reads must exist.
  void validate(Command command) const;
};

// "section.key" -> value, in file order.
using Settings = std::vector<std::pair<std::string, std::string>>;

// Throws ConfigError naming the line on malformed input.
Settings parse_settings(const std::string& text, const std::string& origin = "config");
Settings read_settings(const std::filesystem::path& path);

// Applies one "section.key = value"; throws ConfigError on an unknown key or
// a value that does not parse.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
void apply_settings(RunConfig& config, const Settings& settings);

// Every key with its effective value, in the same format the parser reads.
std::string render_config(const RunConfig& config);

std::vector<std::string> known_keys();

}  // namespace sact::cli
