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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sact/data/batch.hpp"

namespace sact::data {

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Token <-> id map. Ids 0-3 are PAD, UNK, BOS and EOS; corpus tokens follow.
class Vocabulary {
 public:
  Vocabulary();

  // Appends a token if absent and returns its id.
  int add(std::string_view token);
  // UNK for unknown tokens.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  std::span<const std::string> tokens() const { return tokens_; }

  // One token per line in id order, reserved tokens first.
  void save(const std::filesystem::path& path) const;
  // Throws IoError if unreadable and InvalidInput if the reserved tokens are
  // not the first four lines or a token repeats.
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct VocabBuild {
  Vocabulary vocab;
  // Fraction of corpus tokens that map to a non-UNK id.
  double coverage = 0.0;
};

inline constexpr std::size_t kDefaultVocabSize = 30000;

// Keeps the max_size most frequent tokens; equal counts are ordered
// lexicographically. Throws InvalidInput when the corpus has no tokens.
VocabBuild build_vocab(std::span<const std::vector<std::string>> corpus,
                       std::size_t max_size = kDefaultVocabSize);

std::vector<int> encode_sentence(std::span<const std::string> tokens, const Vocabulary& vocab);
// PAD, BOS and EOS are dropped; UNK becomes "<unk>".
std::vector<std::string> decode_ids(std::span<const int> ids, const Vocabulary& vocab);

}  // namespace sact::data
