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

#include "sact/eval/bleu.hpp"

#include <cmath>
#include <map>
#include <string>

#include "sact/errors.hpp"

namespace sact::eval {

namespace {

using Gram = std::vector<std::string>;

data::Sentence fold(const data::Sentence& s) {
  data::Sentence out = s;
  for (auto& t : out)
    for (char& c : t)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::map<Gram, std::size_t> ngrams(const data::Sentence& s, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[Gram(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace

BleuStats bleu_stats(std::span<const data::Sentence> hypotheses, std::span<const data::Sentence> references,
                     std::size_t max_n) {
  if (hypotheses.empty()) throw InvalidInput("bleu: empty corpus");
  if (hypotheses.size() != references.size())
    throw InvalidInput("bleu: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                       std::to_string(references.size()) + " references");
  if (max_n == 0) throw ConfigError("bleu: max_n must be positive");
  BleuStats st;
  st.matches.assign(max_n, 0);
  st.totals.assign(max_n, 0);
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const auto hyp = fold(hypotheses[k]);
    const auto ref = fold(references[k]);
    st.hyp_length += hyp.size();
    st.ref_length += ref.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto h = ngrams(hyp, n);
      const auto r = ngrams(ref, n);
      for (const auto& [g, c] : h) {
        st.totals[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) st.matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (st.hyp_length == 0) return st;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (st.matches[n] == 0) return st;
    log_sum += std::log(static_cast<double>(st.matches[n]) / static_cast<double>(st.totals[n]));
  }
  const double c = static_cast<double>(st.hyp_length);
  const double r = static_cast<double>(st.ref_length);
  st.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
  st.score = 100.0 * st.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n));
  return st;
}

double bleu(std::span<const data::Sentence> hypotheses, std::span<const data::Sentence> references,
            std::size_t max_n) {
  return bleu_stats(hypotheses, references, max_n).score;
}

}  // namespace sact::eval
