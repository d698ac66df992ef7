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
#include <vector>

#include "sact/data/batch.hpp"
#include "sact/seq2seq/model.hpp"

namespace sact::eval {

// Greedy translation of every source side; ids exclude BOS/EOS.
std::vector<std::vector<int>> greedy_translate(std::span<const data::SentencePair> pairs,
                                               seq2seq::ModelParams& params, const seq2seq::ModelConfig& config,
                                               Precision precision = Precision::f64);

// Fraction of hypotheses equal to their target sequence.
double exact_match_rate(std::span<const std::vector<int>> hypotheses, std::span<const data::SentencePair> pairs);

// BLEU over id sequences, each id read as one token.
double bleu_ids(std::span<const std::vector<int>> hypotheses, std::span<const data::SentencePair> pairs,
                std::size_t max_n = 4);

}  // namespace sact::eval
