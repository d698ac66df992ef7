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

#include "sact/data/corpus.hpp"

/// Synthetic parallel corpora.
///
/// Source sentences draw symbols uniformly from an alphabet of `vocab_size`
/// content tokens; symbol i is written as the letter 'a' + i for i < 26 and
/// as "w<i>" beyond that.
///
///   copy      target = source
///   reverse   target = source reversed
///   funcword  the source is cut into windows of 3 consecutive tokens (the
///             last window may be shorter). Each window becomes a function
///             token "f<k>", where k is how many tokens in the window have
///             an even symbol index, followed by the window's tokens
///             translated one-to-one to upper case ("a" -> "A", "w30" ->
///             "W30").
///
/// In funcword, content tokens align to a single source position while each
/// function token depends on a whole window, so a decoder profits from
/// sharp attention on some steps and spread attention on others.
namespace sact::data {

enum class TaskKind { copy, reverse, funcword };

std::optional<TaskKind> parse_task(std::string_view name);
std::string task_name(TaskKind kind);

struct SynthSpec {
  TaskKind kind = TaskKind::copy;
  std::size_t size = 1000;
  std::size_t min_len = 3;
  std::size_t max_len = 10;
  std::size_t vocab_size = 16;
  std::uint64_t seed = 42;
};

inline constexpr std::size_t kFuncwordWindow = 3;

std::string symbol_token(std::size_t index);

// Throws ConfigError on a zero size or vocabulary, or an empty or inverted
// length range.
ParallelCorpus synth_task(const SynthSpec& spec);

// The funcword target for a source sentence.
Sentence funcword_target(std::span<const std::string> src);

// Independent check of a funcword pair: parses the target back into windows
// and re-derives every function token from its source window.
bool funcword_consistent(std::span<const std::string> src, std::span<const std::string> tgt);

}  // namespace sact::data
