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

#include <cmath>
#include <cstddef>
#include <vector>

#include "sact/numerics/ops.hpp"
#include "sact/numerics/rng.hpp"
#include "sact/numerics/tensor.hpp"

namespace sact::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// sum(x * w) for a fixed random weighting w; gives every output entry a
// distinct adjoint so gradient checks see more than the all-ones direction.
inline Var weighted_sum(Var x, std::uint64_t seed = 7) {
  Rng rng(seed);
  Tensor w = random_tensor(x.shape(), rng);
  return ops::sum(ops::mul(x, x.tape->constant(std::move(w))));
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

inline std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace sact::testing
