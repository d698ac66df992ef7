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
#include <span>

#include "sact/data/corpus.hpp"

namespace sact::eval {

struct BleuStats {
  std::vector<std::size_t> matches;  // clipped n-gram matches, n = 1..max_n
  std::vector<std::size_t> totals;   // hypothesis n-grams, n = 1..max_n
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  double brevity_penalty = 0.0;
  double score = 0.0;  // 0..100
};

/// Corpus-level single-reference BLEU.
///
/// Tokens are ASCII case-folded before matching. Clipped n-gram counts are
/// summed over the corpus for n = 1..max_n, the precisions combined by a
/// geometric mean with uniform weights, and multiplied by the brevity
/// penalty exp(1 - r/c) when the hypotheses are shorter (c < r). There is no
/// smoothing: a zero precision at any order gives 0. Throws InvalidInput on
/// an empty corpus or mismatched list lengths.
BleuStats bleu_stats(std::span<const data::Sentence> hypotheses, std::span<const data::Sentence> references,
                     std::size_t max_n = 4);

double bleu(std::span<const data::Sentence> hypotheses, std::span<const data::Sentence> references,
            std::size_t max_n = 4);

}  // namespace sact::eval
