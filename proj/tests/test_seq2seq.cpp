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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "doctest.h"
#include "model_oracle.hpp"
#include "sact/errors.hpp"
#include "sact/numerics/grad_check.hpp"
#include "sact/numerics/ops.hpp"
#include "sact/seq2seq/checkpoint.hpp"
#include "sact/seq2seq/gradcheck.hpp"
#include "sact/seq2seq/model.hpp"
#include "test_util.hpp"

using namespace sact;
using namespace sact::seq2seq;
using sact::attention::TemperatureMode;
using sact::testing::LV;
using sact::testing::random_tensor;
using sact::testing::weighted_sum;

namespace {

ModelConfig small_config(std::size_t vocab = 11, std::size_t dim = 8) {
  ModelConfig c;
  c.src_vocab_size = vocab;
  c.tgt_vocab_size = vocab;
  c.embed_dim = dim;
  c.hidden_dim = dim;
  c.dropout_rate = 0.0;
  return c;
}

// Weights wide enough that attention and temperature vary visibly.
ModelParams random_params(const ModelConfig& c, std::uint64_t seed, double range = 0.5) {
  Rng rng(seed);
  ModelParams p = ModelParams::zeros(c);
  for (auto& [name, t] : p.named())
    for (double& v : t->data()) v = rng.uniform(-range, range);
  return p;
}

std::vector<int> random_sentence(Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<int> s(len);
  for (int& id : s) id = data::kNumReserved + static_cast<int>(rng.below(vocab - data::kNumReserved));
  return s;
}

void check_close(std::span<const double> got, const LV& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(got[i] - (double)want[i]) <= tol);
  }
}

data::Batch batch_of(const std::vector<data::SentencePair>& pairs) { return data::make_batch(pairs); }

}  // namespace

TEST_CASE("model config validation") {
  ModelConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.lambda = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.hidden_dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.tgt_vocab_size = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(small_config().decode_cap(5) == 20);
}

TEST_CASE("parameter initialisation") {
  ModelConfig c = small_config();
  Rng rng(3);
  ModelParams p = init_params(c, rng);
  auto named = p.named();
  CHECK(named.size() == 18);
  for (auto& [name, t] : named) {
    CAPTURE(name);
    if (name.ends_with(".bias")) {
      for (std::size_t i = 0; i < t->size(); ++i) CHECK((*t)[i] == ((i >= 8 && i < 16) ? 1.0 : 0.0));
    } else {
      for (double v : t->data()) CHECK(std::abs(v) < 0.08);
    }
  }
  CHECK(p.ctrl.w_context.shape() == Shape{1, 16});
  CHECK(p.ctrl.u_state.shape() == Shape{1, 8});
  CHECK(p.attn.w_score.shape() == Shape{8, 16});
  Rng again(3);
  ModelParams q = init_params(c, again);
  CHECK(q.vocab.values() == p.vocab.values());
}

TEST_CASE("lstm_cell") {
  SUBCASE("zero weights and state give zero") {
    Tape tape;
    LstmParams g{Tensor(Shape{12, 2}), Tensor(Shape{12, 3}), Tensor(Shape{12})};
    LstmState s{tape.constant(Tensor(Shape{1, 3})), tape.constant(Tensor(Shape{1, 3}))};
    auto out = lstm_cell(tape.constant(Tensor(Shape{1, 2}, 0.7)), s, g);
    for (double v : out.h.value().data()) CHECK(v == 0.0);
    for (double v : out.c.value().data()) CHECK(v == 0.0);
  }
  SUBCASE("saturated forget and input gates carry the memory") {
    Tape tape;
    Rng rng(4);
    LstmParams g{random_tensor(Shape{12, 2}, rng), random_tensor(Shape{12, 3}, rng), Tensor(Shape{12})};
    for (std::size_t i = 0; i < 3; ++i) {
      g.bias[i] = -50.0;
      g.bias[3 + i] = 50.0;
    }
    Tensor c_prev = random_tensor(Shape{2, 3}, rng);
    LstmState s{tape.constant(random_tensor(Shape{2, 3}, rng)), tape.constant(c_prev)};
    auto out = lstm_cell(tape.constant(random_tensor(Shape{2, 2}, rng)), s, g);
    for (std::size_t i = 0; i < c_prev.size(); ++i) CHECK(std::abs(out.c.value()[i] - c_prev[i]) < 1e-9);
  }
  SUBCASE("hand-rolled cell oracle") {
    Tape tape;
    Rng rng(5);
    LstmParams g{random_tensor(Shape{16, 3}, rng), random_tensor(Shape{16, 4}, rng), random_tensor(Shape{16}, rng)};
    Tensor x = random_tensor(Shape{2, 3}, rng), h = random_tensor(Shape{2, 4}, rng), c = random_tensor(Shape{2, 4}, rng);
    auto out = lstm_cell(tape.constant(x), {tape.constant(h), tape.constant(c)}, g);
    for (std::size_t b = 0; b < 2; ++b) {
      auto [hr, cr] = testing::lstm_ref(testing::row_of(x, b), testing::row_of(h, b), testing::row_of(c, b), g);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(out.h.value().at(b, k) - (double)hr[k]) < 1e-12);
        CHECK(std::abs(out.c.value().at(b, k) - (double)cr[k]) < 1e-12);
      }
    }
  }
  SUBCASE("shape mismatch") {
    Tape tape;
    LstmParams g{Tensor(Shape{12, 2}), Tensor(Shape{12, 3}), Tensor(Shape{12})};
    LstmState s{tape.constant(Tensor(Shape{1, 3})), tape.constant(Tensor(Shape{1, 3}))};
    CHECK_THROWS_AS(lstm_cell(tape.constant(Tensor(Shape{1, 5})), s, g), ShapeError);
  }
}

TEST_CASE("encode") {
  ModelConfig c = small_config(11, 4);
  SUBCASE("single token") {
    ModelParams p = random_params(c, 1);
    Tape tape;
    std::vector<int> src{5};
    std::vector<std::uint8_t> mask{1};
    auto enc = encode(tape, src, mask, 1, p, c, {});
    CHECK(enc.states.shape() == Shape{1, 1, 8});
    auto ref = testing::encode_ref(src, p, 4);
    check_close(enc.states.value().data(), ref.states[0], 1e-12);
  }
  SUBCASE("zero parameters give zero outputs") {
    ModelParams p = ModelParams::zeros(c);
    Tape tape;
    std::vector<int> src{4, 5, 6};
    std::vector<std::uint8_t> mask{1, 1, 1};
    auto enc = encode(tape, src, mask, 1, p, c, {});
    for (double v : enc.states.value().data()) CHECK(v == 0.0);
  }
  SUBCASE("two independent passes oracle") {
    ModelParams p = random_params(c, 2);
    Tape tape;
    std::vector<int> src{7, 4, 9};
    std::vector<std::uint8_t> mask{1, 1, 1};
    auto enc = encode(tape, src, mask, 1, p, c, {});
    auto ref = testing::encode_ref(src, p, 4);
    LV flat;
    for (auto& row : ref.states) flat.insert(flat.end(), row.begin(), row.end());
    check_close(enc.states.value().data(), flat, 1e-12);
    check_close(enc.fwd_final.value().data(), ref.fwd_final, 1e-12);
    check_close(enc.bwd_first.value().data(), ref.bwd_first, 1e-12);
  }
  SUBCASE("padded rows match their unpadded encoding") {
    ModelParams p = random_params(c, 3);
    Tape tape;
    std::vector<int> src{7, 4, 9, 5, 6, 0};
    std::vector<std::uint8_t> mask{1, 1, 1, 1, 1, 0};
    auto enc = encode(tape, src, mask, 2, p, c, {});
    std::vector<int> short_row{5, 6};
    auto ref = testing::encode_ref(short_row, p, 4);
    const auto& v = enc.states.value();
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(v[(3 + i) * 8 + k] - (double)ref.states[i][k]) < 1e-12);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(enc.fwd_final.value().at(1, k) - (double)ref.fwd_final[k]) < 1e-12);
      CHECK(std::abs(enc.bwd_first.value().at(1, k) - (double)ref.bwd_first[k]) < 1e-12);
    }
  }
  SUBCASE("errors") {
    ModelParams p = random_params(c, 3);
    Tape tape;
    std::vector<int> none;
    std::vector<std::uint8_t> no_mask;
    CHECK_THROWS_AS(encode(tape, none, no_mask, 1, p, c, {}), InvalidInput);
    std::vector<int> src{4, 11};
    std::vector<std::uint8_t> mask{1, 1};
    CHECK_THROWS_AS(encode(tape, src, mask, 1, p, c, {}), IndexError);
  }
}

TEST_CASE("init_decoder") {
  ModelConfig c = small_config(11, 4);
  SUBCASE("zero bridge") {
    ModelParams p = random_params(c, 1);
    p.bridge = Tensor(p.bridge.shape());
    Tape tape;
    std::vector<int> src{4, 5};
    std::vector<std::uint8_t> mask{1, 1};
    auto init = init_decoder(encode(tape, src, mask, 1, p, c, {}), p);
    CHECK(init.state.h.shape() == Shape{1, 4});
    CHECK(init.context.shape() == Shape{1, 8});
    for (double v : init.state.h.value().data()) CHECK(v == 0.0);
    for (double v : init.state.c.value().data()) CHECK(v == 0.0);
    for (double v : init.context.value().data()) CHECK(v == 0.0);
  }
  SUBCASE("affine and tanh oracle") {
    ModelParams p = random_params(c, 6);
    Tape tape;
    std::vector<int> src{4, 8, 5};
    std::vector<std::uint8_t> mask{1, 1, 1};
    auto init = init_decoder(encode(tape, src, mask, 1, p, c, {}), p);
    auto ref = testing::init_ref(testing::encode_ref(src, p, 4), p);
    check_close(init.state.h.value().data(), ref.h, 1e-12);
    check_close(init.context.value().data(), ref.ctx, 1e-12);
  }
}

TEST_CASE("decode_step") {
  ModelConfig c = small_config(11, 4);
  std::vector<int> src{4, 8, 5, 9};
  std::vector<std::uint8_t> mask(src.size(), 1);
  SUBCASE("composition oracle over several steps") {
    ModelParams p = random_params(c, 7, 0.8);
    Tape tape;
    auto enc = encode(tape, src, mask, 1, p, c, {});
    auto init = init_decoder(enc, p);
    auto eref = testing::encode_ref(src, p, 4);
    auto sref = testing::init_ref(eref, p);
    LstmState state = init.state;
    Var ctx = init.context;
    for (int prev : {data::kBos, 6, 7}) {
      const int ids[] = {prev};
      auto out = decode_step(ids, state, ctx, enc, p, c, {});
      auto ref = testing::step_ref(prev, sref, eref, p, c.lambda);
      check_close(out.logits.value().data(), ref.logits, 1e-10);
      check_close(out.attention.alpha.value().data(), ref.alpha, 1e-10);
      CHECK(std::abs(out.attention.tau.value()[0] - (double)ref.tau) < 1e-10);
      CHECK(std::abs(out.attention.beta.value()[0] - (double)ref.beta) < 1e-10);
      state = out.state;
      ctx = out.attention.context;
    }
  }
  SUBCASE("zero controller equals a conventional-attention step") {
    ModelParams p = random_params(c, 8, 0.8);
    p.ctrl.w_context = Tensor(p.ctrl.w_context.shape());
    p.ctrl.u_state = Tensor(p.ctrl.u_state.shape());
    ModelConfig conv = c;
    conv.temperature.mode = TemperatureMode::conventional;
    Tape ta, tb;
    auto ea = encode(ta, src, mask, 1, p, c, {});
    auto eb = encode(tb, src, mask, 1, p, conv, {});
    auto ia = init_decoder(ea, p);
    auto ib = init_decoder(eb, p);
    const int ids[] = {data::kBos};
    auto a = decode_step(ids, ia.state, ia.context, ea, p, c, {});
    auto b = decode_step(ids, ib.state, ib.context, eb, p, conv, {});
    CHECK(a.attention.tau.value()[0] == 1.0);
    CHECK(a.logits.value().values() == b.logits.value().values());
    CHECK(a.attention.context.value().values() == b.attention.context.value().values());
  }
  SUBCASE("zero parameters give uniform logits") {
    ModelParams p = ModelParams::zeros(c);
    Tape tape;
    auto enc = encode(tape, src, mask, 1, p, c, {});
    auto init = init_decoder(enc, p);
    const int ids[] = {data::kBos};
    auto out = decode_step(ids, init.state, init.context, enc, p, c, {});
    for (double v : out.logits.value().data()) CHECK(v == 0.0);
    const int target[] = {5};
    const std::uint8_t keep[] = {1};
    CHECK(ops::cross_entropy(out.logits, target, keep).value().item() == doctest::Approx(std::log(11.0)).epsilon(1e-15));
  }
  SUBCASE("previous id out of range") {
    ModelParams p = random_params(c, 9);
    Tape tape;
    auto enc = encode(tape, src, mask, 1, p, c, {});
    auto init = init_decoder(enc, p);
    const int ids[] = {11};
    CHECK_THROWS_AS(decode_step(ids, init.state, init.context, enc, p, c, {}), IndexError);
  }
}

TEST_CASE("forward_loss") {
  SUBCASE("zero parameters give ln V") {
    ModelConfig c = small_config(23, 4);
    ModelParams p = ModelParams::zeros(c);
    Tape tape;
    auto batch = batch_of({{{4, 5, 6}, {7, 8}}, {{9}, {10, 11, 12}}});
    auto out = forward_loss(tape, batch, p, c, {});
    CHECK(out.loss.value().item() == doctest::Approx(std::log(23.0)).epsilon(1e-15));
    CHECK(out.taus.size() == 3 + 4);
  }
  SUBCASE("hand computation with forced logits") {
    // Zero weights except a saturated candidate bias in the decoder and an
    // identity readout on the state half: every hidden quantity has a closed
    // form and the encoder contributes nothing.
    ModelConfig c = small_config(5, 2);
    ModelParams p = ModelParams::zeros(c);
    for (std::size_t k = 0; k < 2; ++k) p.dec.bias[4 + k] = 50.0;
    p.readout.at(0, 4) = 1.0;
    p.readout.at(1, 5) = 1.0;
    p.vocab.at(4, 0) = 2.0;
    p.vocab.at(3, 1) = -1.0;
    Tape tape;
    auto batch = batch_of({{{4}, {4}}});
    auto out = forward_loss(tape, batch, p, c, {});
    // step 1: c = 0.5 tanh(50), h = 0.5 tanh(c); step 2: c = 0.5 c1 + 0.5 tanh(50)
    const long double g = std::tanh(50.0L);
    const long double c1 = 0.5L * g, h1 = 0.5L * std::tanh(c1);
    const long double c2 = 0.5L * c1 + 0.5L * g, h2 = 0.5L * std::tanh(c2);
    auto ce = [](long double r, int target) {
      const long double t = std::tanh(r);
      const long double logits[5] = {0, 0, 0, -t, 2 * t};
      long double z = 0;
      for (auto l : logits) z += std::exp(l);
      return std::log(z) - logits[target];
    };
    const long double want = (ce(h1, 4) + ce(h2, data::kEos)) / 2;
    CHECK(std::abs(out.loss.value().item() - (double)want) < 1e-12);
  }
  SUBCASE("recorded temperatures stay inside the bounds") {
    ModelConfig c = small_config(11, 6);
    ModelParams p = random_params(c, 10, 2.0);
    Rng rng(1);
    std::vector<data::SentencePair> pairs;
    for (int i = 0; i < 6; ++i)
      pairs.push_back({random_sentence(rng, 1 + rng.below(6), 11), random_sentence(rng, 1 + rng.below(6), 11)});
    Tape tape;
    auto out = forward_loss(tape, batch_of(pairs), p, c, {});
    std::size_t positions = 0;
    for (auto& pr : pairs) positions += pr.tgt.size() + 1;
    CHECK(out.taus.size() == positions);
    for (double t : out.taus) {
      CHECK(t > 0.25);
      CHECK(t < 4.0);
    }
  }
}

TEST_CASE("full model gradients pass finite differences") {
  auto report = check_model_gradients();
  std::vector<std::string> names;
  for (auto& [name, t] : ModelParams::zeros(gradcheck_config()).named()) names.push_back(name);
  REQUIRE(report.groups.size() == names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    CAPTURE(names[i]);
    CHECK(report.groups[i].name == names[i]);
    CHECK(report.groups[i].max_rel_error < 1e-4);
  }

  SUBCASE("a corrupted adjoint is caught in its own group only") {
    auto broken = check_model_gradients({42, 1e-4, "sact.U_s", 1.5});
    for (const auto& g : broken.groups) {
      CAPTURE(g.name);
      if (g.name == "sact.U_s")
        CHECK(g.max_rel_error > 0.1);
      else
        CHECK(g.max_rel_error < 1e-4);
    }
    CHECK_THROWS_AS(check_model_gradients({42, 1e-4, "nope", 1.5}), ConfigError);
  }
}

TEST_CASE("greedy decoding") {
  ModelConfig c = small_config(7, 2);
  ModelParams p = ModelParams::zeros(c);
  for (std::size_t k = 0; k < 2; ++k) p.dec.bias[4 + k] = 50.0;
  p.readout.at(0, 4) = 1.0;
  p.readout.at(1, 5) = 1.0;
  std::vector<int> src{4, 5, 6, 4, 5};
  SUBCASE("output layer forcing EOS stops after one step") {
    p.vocab.at(data::kEos, 0) = 1.0;
    auto res = greedy_decode(src, p, c);
    CHECK(res.ids.empty());
    CHECK(res.alpha.size() == 1);
    CHECK(res.tau.size() == 1);
  }
  SUBCASE("a model that never emits EOS hits the length cap") {
    p.vocab.at(6, 0) = 1.0;
    p.vocab.at(data::kEos, 0) = -1.0;
    auto res = greedy_decode(src, p, c);
    CHECK(res.ids.size() == 20);
    CHECK(res.alpha.size() == 20);
    for (int id : res.ids) CHECK(id == 6);
  }
  SUBCASE("trace rows are distributions with bounded temperature") {
    ModelConfig rc = small_config(11, 6);
    ModelParams rp = random_params(rc, 13, 1.0);
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
      auto s = random_sentence(rng, 2 + rng.below(5), 11);
      auto res = greedy_decode(s, rp, rc);
      REQUIRE(res.alpha.size() == res.tau.size());
      for (std::size_t t = 0; t < res.alpha.size(); ++t) {
        double sum = 0;
        for (double a : res.alpha[t]) {
          CHECK(a > 0.0);
          sum += a;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        CHECK(res.tau[t] > 0.25);
        CHECK(res.tau[t] < 4.0);
      }
    }
  }
}

TEST_CASE("beam search") {
  ModelConfig c = small_config(11, 6);
  ModelParams p = random_params(c, 14, 1.0);
  SUBCASE("beam 1 is greedy") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      auto s = random_sentence(rng, 1 + rng.below(8), 11);
      auto g = greedy_decode(s, p, c);
      auto b = beam_decode(s, p, c, 1);
      CHECK(b.ids == g.ids);
      CHECK(b.mean_logprob == g.mean_logprob);
    }
  }
  SUBCASE("full-width beam over two steps matches exhaustive search") {
    ModelConfig tc = small_config(6, 3);
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      ModelParams tp = random_params(tc, 100 + trial, 1.5);
      auto s = random_sentence(rng, 3, 6);
      // Enumerate every sequence of at most two steps.
      Tape tape(Precision::f64, false);
      std::vector<std::uint8_t> mask(s.size(), 1);
      auto enc = encode(tape, s, mask, 1, tp, tc, {});
      auto init = init_decoder(enc, tp);
      const int bos[] = {data::kBos};
      auto first = decode_step(bos, init.state, init.context, enc, tp, tc, {});
      auto lp1 = log_softmax(first.logits.value().data());
      double best = lp1[data::kEos];
      std::vector<int> best_ids;
      for (int a = 0; a < 6; ++a) {
        if (a == data::kEos) continue;
        const int prev[] = {a};
        auto second = decode_step(prev, first.state, first.attention.context, enc, tp, tc, {});
        auto lp2 = log_softmax(second.logits.value().data());
        for (int b = 0; b < 6; ++b) {
          const double mean = (lp1[a] + lp2[b]) / 2.0;
          if (mean > best) {
            best = mean;
            best_ids = b == data::kEos ? std::vector<int>{a} : std::vector<int>{a, b};
          }
        }
      }
      auto res = beam_decode(s, tp, tc, 6, 2);
      CHECK(res.ids == best_ids);
      CHECK(res.mean_logprob == doctest::Approx(best).epsilon(1e-12));
    }
  }
  SUBCASE("beam width must be positive") {
    std::vector<int> s{4, 5};
    CHECK_THROWS_AS(beam_decode(s, p, c, 0), ConfigError);
  }
}

TEST_CASE("temperature-one reduction over whole sentences") {
  ModelConfig c = small_config(11, 6);
  ModelParams p = random_params(c, 15, 1.0);
  p.ctrl.w_context = Tensor(p.ctrl.w_context.shape());
  p.ctrl.u_state = Tensor(p.ctrl.u_state.shape());
  ModelConfig conv = c;
  conv.temperature.mode = TemperatureMode::conventional;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto s = random_sentence(rng, 1 + rng.below(8), 11);
    auto t = random_sentence(rng, 1 + rng.below(8), 11);
    Tape ta, tb;
    auto batch = batch_of({{s, t}});
    CHECK(forward_loss(ta, batch, p, c, {}).loss.value().item() ==
          forward_loss(tb, batch, p, conv, {}).loss.value().item());
    CHECK(greedy_decode(s, p, c).ids == greedy_decode(s, p, conv).ids);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "sact_test_ckpt";
  std::filesystem::create_directories(dir);
  ModelConfig c = small_config(11, 5);
  c.temperature = {TemperatureMode::fixed, 0.9};
  Rng rng(16);
  ModelParams p = init_params(c, rng);
  Tensor extra = random_tensor(Shape{2, 3}, rng);
  save_checkpoint(dir / "m.ckpt", c, p, {{"adam.m/x", &extra}}, {{"step", 17}});
  auto ck = load_checkpoint(dir / "m.ckpt");
  CHECK(ck.config.temperature.mode == TemperatureMode::fixed);
  CHECK(ck.config.temperature.fixed_tau == 0.9);
  CHECK(ck.config.hidden_dim == 5);
  CHECK(ck.meta.at("step") == 17);
  auto a = p.named();
  auto b = ck.params.named();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tensor->values() == b[i].tensor->values());
  CHECK(ck.extra.at("adam.m/x").values() == extra.values());

  auto batch = batch_of({{{4, 5, 6}, {7, 8}}});
  Tape t1, t2;
  CHECK(forward_loss(t1, batch, p, c, {}).loss.value().item() ==
        forward_loss(t2, batch, ck.params, ck.config, {}).loss.value().item());

  SUBCASE("dimension mismatch names the tensor") {
    ModelConfig other = c;
    other.hidden_dim = 6;
    ModelParams expected = ModelParams::zeros(other);
    try {
      check_same_shapes(expected, ck.params);
      FAIL("no error");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("enc_fwd.W_ih") != std::string::npos);
    }
  }
  SUBCASE("truncated file") {
    std::ifstream in(dir / "m.ckpt", std::ios::binary);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream(dir / "cut.ckpt", std::ios::binary) << raw.substr(0, raw.size() - 9);
    CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), IoError);
    std::ofstream(dir / "junk.ckpt", std::ios::binary) << "not a checkpoint at all";
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), IoError);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
  }
  std::filesystem::remove_all(dir);
}
