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

#include "sact/data/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "sact/errors.hpp"

namespace sact::data {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

Sentence tokenize(std::string_view line, bool lowercase) {
  Sentence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) {
      std::string tok(line.substr(i, j - i));
      if (lowercase)
        for (char& c : tok)
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("short write on " + path.string());
}

void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) lines.push_back(join(s));
  write_lines(path, lines);
}

ParallelCorpus read_parallel(const std::filesystem::path& src, const std::filesystem::path& tgt, bool lowercase,
                             std::size_t max_len) {
  const auto a = read_lines(src);
  const auto b = read_lines(tgt);
  if (a.size() != b.size())
    throw InvalidInput(src.string() + " has " + std::to_string(a.size()) + " lines but " + tgt.string() +
                       " has " + std::to_string(b.size()));
  ParallelCorpus c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Sentence s = tokenize(a[i], lowercase);
    Sentence t = tokenize(b[i], lowercase);
    if (s.empty() || t.empty()) {
      ++c.dropped_empty;
    } else if (s.size() > max_len || t.size() > max_len) {
      ++c.dropped_long;
    } else {
      c.src.push_back(std::move(s));
      c.tgt.push_back(std::move(t));
    }
  }
  return c;
}

std::vector<SentencePair> encode_corpus(const ParallelCorpus& corpus, const Vocabulary& src_vocab,
                                        const Vocabulary& tgt_vocab) {
  std::vector<SentencePair> out;
  out.reserve(corpus.src.size());
  for (std::size_t i = 0; i < corpus.src.size(); ++i)
    out.push_back({encode_sentence(corpus.src[i], src_vocab), encode_sentence(corpus.tgt[i], tgt_vocab)});
  return out;
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const SentencePair> pairs, std::size_t batch_size,
                                                   Rng& rng) {
  if (pairs.empty()) throw InvalidInput("plan_batches: no sentence pairs");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<std::size_t>> batches;
  const std::size_t bucket = 64 * batch_size;
  for (std::size_t start = 0; start < order.size(); start += bucket) {
    const std::size_t end = std::min(order.size(), start + bucket);
    auto at = [&](std::size_t i) { return order.begin() + static_cast<std::ptrdiff_t>(i); };
    std::stable_sort(at(start), at(end), [&](std::size_t x, std::size_t y) {
      if (pairs[x].src.size() != pairs[y].src.size()) return pairs[x].src.size() < pairs[y].src.size();
      return pairs[x].tgt.size() < pairs[y].tgt.size();
    });
    for (std::size_t s = start; s < end; s += batch_size)
      batches.emplace_back(at(s), at(std::min(end, s + batch_size)));
  }
  rng.shuffle(std::span<std::vector<std::size_t>>(batches));
  return batches;
}

std::vector<Batch> make_batches(std::span<const SentencePair> pairs, std::size_t batch_size, Rng& rng) {
  std::vector<Batch> out;
  for (const auto& idx : plan_batches(pairs, batch_size, rng)) {
    std::vector<SentencePair> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(pairs[i]);
    out.push_back(make_batch(rows));
  }
  return out;
}

std::vector<Batch> sequential_batches(std::span<const SentencePair> pairs, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::vector<Batch> out;
  for (std::size_t i = 0; i < pairs.size(); i += batch_size)
    out.push_back(make_batch(pairs.subspan(i, std::min(batch_size, pairs.size() - i))));
  return out;
}

}  // namespace sact::data
