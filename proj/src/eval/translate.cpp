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

#include "sact/eval/translate.hpp"

#include <string>

#include "sact/errors.hpp"
#include "sact/eval/bleu.hpp"

namespace sact::eval {

namespace {

data::Sentence as_tokens(const std::vector<int>& ids) {
  data::Sentence out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(std::to_string(id));
  return out;
}

void check_sizes(std::size_t hyps, std::size_t pairs) {
  if (hyps != pairs)
    throw InvalidInput(std::to_string(hyps) + " hypotheses for " + std::to_string(pairs) + " references");
}

}  // namespace

std::vector<std::vector<int>> greedy_translate(std::span<const data::SentencePair> pairs,
                                               seq2seq::ModelParams& params, const seq2seq::ModelConfig& config,
                                               Precision precision) {
  std::vector<std::vector<int>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(seq2seq::greedy_decode(p.src, params, config, std::nullopt, precision).ids);
  return out;
}

double exact_match_rate(std::span<const std::vector<int>> hypotheses, std::span<const data::SentencePair> pairs) {
  check_sizes(hypotheses.size(), pairs.size());
  if (pairs.empty()) throw InvalidInput("exact match over an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) hits += hypotheses[i] == pairs[i].tgt;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double bleu_ids(std::span<const std::vector<int>> hypotheses, std::span<const data::SentencePair> pairs,
                std::size_t max_n) {
  check_sizes(hypotheses.size(), pairs.size());
  std::vector<data::Sentence> hyp, ref;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    hyp.push_back(as_tokens(hypotheses[i]));
    ref.push_back(as_tokens(pairs[i].tgt));
  }
  return bleu(hyp, ref, max_n);
}

}  // namespace sact::eval
