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

#include "sact/data/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sact/errors.hpp"

namespace sact::data {

Vocabulary::Vocabulary() {
  for (std::string_view t : {kPadToken, kUnkToken, kBosToken, kEosToken}) add(t);
}

int Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw IndexError("vocabulary id " + std::to_string(id) + " outside [0, " + std::to_string(tokens_.size()) + ")");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw IoError("short write on vocabulary " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  const Vocabulary reserved;
  if (lines.size() < reserved.size() || !std::equal(reserved.tokens_.begin(), reserved.tokens_.end(), lines.begin()))
    throw InvalidInput(path.string() + ": vocabulary must start with " + std::string(kPadToken) + " " +
                       std::string(kUnkToken) + " " + std::string(kBosToken) + " " + std::string(kEosToken));
  Vocabulary v;
  for (std::size_t i = reserved.size(); i < lines.size(); ++i) {
    if (lines[i].empty() || v.contains(lines[i]))
      throw InvalidInput(path.string() + ":" + std::to_string(i + 1) + ": empty or repeated token");
    v.add(lines[i]);
  }
  return v;
}

VocabBuild build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& sentence : corpus)
    for (const auto& t : sentence) {
      ++counts[t];
      ++total;
    }
  if (total == 0) throw InvalidInput("build_vocab: corpus has no tokens");

  const Vocabulary reserved;
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (!reserved.contains(tok)) ranked.emplace_back(tok, n);
  // std::map iteration is already lexicographic, so a stable sort by count
  // keeps ties in that order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  VocabBuild out;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < ranked.size() && i < max_size; ++i) {
    out.vocab.add(ranked[i].first);
    covered += ranked[i].second;
  }
  for (auto& [tok, n] : counts)
    if (reserved.contains(tok) && tok != kUnkToken) covered += n;
  out.coverage = static_cast<double>(covered) / static_cast<double>(total);
  return out;
}

std::vector<int> encode_sentence(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

std::vector<std::string> decode_ids(std::span<const int> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

}  // namespace sact::data
