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

#include "sact/data/batch.hpp"

#include <algorithm>
#include <string>

#include "sact/errors.hpp"

namespace sact::data {

Batch make_batch(std::span<const SentencePair> pairs) {
  if (pairs.empty()) throw InvalidInput("make_batch: no sentence pairs");
  Batch b;
  b.size = pairs.size();
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (pairs[r].src.empty()) throw InvalidInput("make_batch: empty source sentence in row " + std::to_string(r));
    b.src_len = std::max(b.src_len, pairs[r].src.size());
    b.tgt_len = std::max(b.tgt_len, pairs[r].tgt.size() + 2);
  }
  b.src.assign(b.size * b.src_len, kPad);
  b.tgt.assign(b.size * b.tgt_len, kPad);
  b.src_mask.assign(b.src.size(), 0);
  b.tgt_mask.assign(b.tgt.size(), 0);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& p = pairs[r];
    for (std::size_t i = 0; i < p.src.size(); ++i) {
      b.src[r * b.src_len + i] = p.src[i];
      b.src_mask[r * b.src_len + i] = 1;
    }
    int* row = &b.tgt[r * b.tgt_len];
    row[0] = kBos;
    std::copy(p.tgt.begin(), p.tgt.end(), row + 1);
    row[p.tgt.size() + 1] = kEos;
    std::fill_n(&b.tgt_mask[r * b.tgt_len], p.tgt.size() + 2, std::uint8_t{1});
    b.src_lengths.push_back(p.src.size());
    b.tgt_lengths.push_back(p.tgt.size() + 2);
  }
  return b;
}

}  // namespace sact::data
