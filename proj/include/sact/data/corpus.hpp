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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sact/data/batch.hpp"
#include "sact/data/vocab.hpp"
#include "sact/numerics/rng.hpp"

namespace sact::data {

using Sentence = std::vector<std::string>;

// Whitespace split; `lowercase` folds ASCII letters.
Sentence tokenize(std::string_view line, bool lowercase = false);
std::string join(std::span<const std::string> tokens);

struct ParallelCorpus {
  std::vector<Sentence> src;
  std::vector<Sentence> tgt;
  std::size_t dropped_long = 0;   // either side over the length cap
  std::size_t dropped_empty = 0;  // either side empty
};

inline constexpr std::size_t kMaxSentenceLength = 100;

// Reads two aligned one-sentence-per-line files. Pairs with an empty side or
// a side longer than max_len tokens are dropped and counted. Throws IoError
// on unreadable files and InvalidInput when line counts differ.
ParallelCorpus read_parallel(const std::filesystem::path& src, const std::filesystem::path& tgt,
                             bool lowercase = false, std::size_t max_len = kMaxSentenceLength);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);
void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences);

std::vector<SentencePair> encode_corpus(const ParallelCorpus& corpus, const Vocabulary& src_vocab,
                                        const Vocabulary& tgt_vocab);

/// Batching order.
///
/// Pair indices are Fisher-Yates shuffled with `rng`, cut into buckets of
/// 64 * batch_size, each bucket is stably sorted by (source length, target
/// length) and cut into batches, and finally the batch order is shuffled.
/// Every index appears in exactly one batch. Throws InvalidInput on an
/// empty pair list and ConfigError when batch_size is 0.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const SentencePair> pairs, std::size_t batch_size,
                                                   Rng& rng);

std::vector<Batch> make_batches(std::span<const SentencePair> pairs, std::size_t batch_size, Rng& rng);

// Batches in input order with no shuffling, for evaluation.
std::vector<Batch> sequential_batches(std::span<const SentencePair> pairs, std::size_t batch_size);

}  // namespace sact::data
