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
#include <string>

#include "sact/numerics/grad_check.hpp"
#include "sact/seq2seq/model.hpp"

namespace sact::seq2seq {

struct ModelGradCheckOptions {
  std::uint64_t seed = 42;
  double eps = 1e-4;
  // Scales every adjoint reaching the named parameter group; empty = none.
  std::string fault_group;
  double fault_scale = 1.5;
};

// Hidden 8, embed 8, vocabulary 11, lambda 4, dropout 0.3.
ModelConfig gradcheck_config();

/// Finite-difference check of the full training loss of a small reference
/// model over one batch of two sentence pairs.
///
/// Weights are drawn from U(-1, 1) rather than the training initialisation:
/// at init scale many gradient entries sit near 1e-9, below what a central
/// difference can resolve in double precision. Dropout masks are fixed per
/// evaluation so the loss is a deterministic function of the parameters.
GradCheckReport check_model_gradients(const ModelGradCheckOptions& options = {});

}  // namespace sact::seq2seq
