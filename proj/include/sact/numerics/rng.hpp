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
#include <random>
#include <span>
#include <string_view>

namespace sact {

/// Seeded, splittable pseudo-random generator.
///
/// split() derives an independent child stream from (seed, stream id) without
/// consuming state from the parent, so e.g. the dropout masks of step 1234 do
/// not depend on how many draws any other consumer made before it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42);

  std::uint64_t seed() const { return seed_; }

  Rng split(std::uint64_t stream) const;
  Rng split(std::string_view stream) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    // Fisher-Yates, back to front.
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sact
