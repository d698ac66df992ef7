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

#include "sact/seq2seq/gradcheck.hpp"

#include <vector>

#include "sact/errors.hpp"

namespace sact::seq2seq {

ModelConfig gradcheck_config() {
  ModelConfig c;
  c.src_vocab_size = 11;
  c.tgt_vocab_size = 11;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.lambda = 4.0;
  c.dropout_rate = 0.3;
  return c;
}

GradCheckReport check_model_gradients(const ModelGradCheckOptions& options) {
  const ModelConfig config = gradcheck_config();
  Rng root(options.seed);
  Rng weights = root.split("weights");
  ModelParams params = ModelParams::zeros(config);
  for (auto& [name, t] : params.named())
    for (double& v : t->data()) v = weights.uniform(-1.0, 1.0);

  // Two pairs of different lengths so padding is exercised on both sides.
  Rng words = root.split("sentences");
  auto sentence = [&](std::size_t len) {
    std::vector<int> s(len);
    for (int& id : s)
      id = data::kNumReserved + static_cast<int>(words.below(config.src_vocab_size - data::kNumReserved));
    return s;
  };
  std::vector<data::SentencePair> pairs{{sentence(4), sentence(2)}, {sentence(2), sentence(3)}};
  const data::Batch batch = data::make_batch(pairs);

  auto named = params.named();
  const Tensor* faulty = nullptr;
  if (!options.fault_group.empty()) {
    for (auto& [name, t] : named)
      if (name == options.fault_group) faulty = t;
    if (!faulty) throw ConfigError("unknown parameter group '" + options.fault_group + "'");
  }
  const std::uint64_t mask_seed = root.split("dropout").seed();
  LossFn loss = [&](Tape& tape) {
    if (faulty) tape.inject_param_fault(faulty, options.fault_scale);
    Rng masks(mask_seed);
    return forward_loss(tape, batch, params, config, {true, &masks}).loss;
  };
  return grad_check(loss, named, options.eps);
}

}  // namespace sact::seq2seq
