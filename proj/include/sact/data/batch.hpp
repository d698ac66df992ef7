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
#include <span>
#include <vector>

namespace sact::data {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kNumReserved = 4;

// One sentence pair as vocabulary ids, without BOS/EOS.
struct SentencePair {
  std::vector<int> src;
  std::vector<int> tgt;
};

/// Padded id matrices, row-major. Target rows are BOS y_1 .. y_m EOS followed
/// by PAD; masks are 1 on real tokens (BOS and EOS included) and 0 on PAD.
struct Batch {
  std::size_t size = 0;
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::vector<int> src;
  std::vector<int> tgt;
  std::vector<std::uint8_t> src_mask;
  std::vector<std::uint8_t> tgt_mask;
  std::vector<std::size_t> src_lengths;
  std::vector<std::size_t> tgt_lengths;  // includes BOS and EOS

  int src_at(std::size_t row, std::size_t pos) const { return src[row * src_len + pos]; }
  int tgt_at(std::size_t row, std::size_t pos) const { return tgt[row * tgt_len + pos]; }
};

// Throws InvalidInput on an empty list or an empty source sentence.
Batch make_batch(std::span<const SentencePair> pairs);

}  // namespace sact::data
