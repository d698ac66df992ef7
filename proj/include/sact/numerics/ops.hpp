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

#include <cstdint>
#include <span>

#include "sact/numerics/rng.hpp"
#include "sact/numerics/tape.hpp"

// Differentiable operations. Matrices are row-major; a rank-1 tensor behaves
// as a single row wherever a matrix is expected. Batched sequence tensors are
// rank-3 [batch x steps x features].
namespace sact::ops {

// Score assigned to masked positions before a softmax.
inline constexpr double kMaskedScore = -1e30;

enum class Unary { tanh, sigmoid, exp, log, scale };
enum class Binary { add, sub, mul };

// `factor` is only read for Unary::scale.
Var elementwise(Unary kind, Var x, double factor = 1.0);
Var elementwise(Binary kind, Var a, Var b);

inline Var tanh(Var x) { return elementwise(Unary::tanh, x); }
inline Var sigmoid(Var x) { return elementwise(Unary::sigmoid, x); }
inline Var exp(Var x) { return elementwise(Unary::exp, x); }
// Throws DomainError on any non-positive entry.
inline Var log(Var x) { return elementwise(Unary::log, x); }
inline Var scale(Var x, double factor) { return elementwise(Unary::scale, x, factor); }
inline Var add(Var a, Var b) { return elementwise(Binary::add, a, b); }
inline Var sub(Var a, Var b) { return elementwise(Binary::sub, a, b); }
inline Var mul(Var a, Var b) { return elementwise(Binary::mul, a, b); }

// a[m x n] + bias[n] broadcast over rows.
Var add_row(Var a, Var bias);

// [m x k] * [k x n]
Var matmul(Var a, Var b);
// [m x k] * [n x k]^T, i.e. applies a weight stored output-major.
Var matmul_nt(Var a, Var b);

Var sum(Var x);

// Row-wise softmax of `logits` divided by a positive temperature. `tau`
// holds one temperature per row, or a single one shared by all rows. The
// gradient reaches both the logits and the temperature.
Var softmax_with_temperature(Var logits, Var tau);
// Row-wise softmax with no temperature.
Var softmax(Var logits);

// Entries whose keep flag is zero become kMaskedScore.
Var mask_fill(Var x, std::span<const std::uint8_t> keep);

// Mean over unmasked rows of -log softmax(logits)[target].
Var cross_entropy(Var logits, std::span<const int> targets, std::span<const std::uint8_t> mask);

// Inverted dropout. Returns x unchanged when not training or rate == 0.
Var dropout(Var x, double rate, bool training, Rng& rng);

// Embedding lookup: rows of table[V x d] selected by ids.
Var gather_rows(Var table, std::span<const int> ids);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t start, std::size_t width);
Var concat_rows(std::span<const Var> parts);
// n tensors [B x d] -> [B x n x d].
Var stack_steps(std::span<const Var> steps);
// Row r comes from `a` where take_a[r] != 0, else from `b`.
Var select_rows(std::span<const std::uint8_t> take_a, Var a, Var b);

// states[B x n x d], query[B x d] -> [B x n], out[b,i] = <states[b,i,:], query[b,:]>.
Var batched_dot(Var states, Var query);
// states[B x n x d], weights[B x n] -> [B x d], out[b,:] = sum_i weights[b,i] states[b,i,:].
Var batched_weighted_sum(Var states, Var weights);

}  // namespace sact::ops
