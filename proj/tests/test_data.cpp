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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "sact/data/corpus.hpp"
#include "sact/data/synth.hpp"
#include "sact/data/vocab.hpp"
#include "sact/errors.hpp"

using namespace sact;
using namespace sact::data;

namespace {

std::vector<Sentence> corpus_of(std::initializer_list<const char*> lines) {
  std::vector<Sentence> out;
  for (const char* l : lines) out.push_back(tokenize(l));
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sact_test_data";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("  the\tcat  sat \r") == Sentence{"the", "cat", "sat"});
  CHECK(tokenize("The CAT", true) == Sentence{"the", "cat"});
  CHECK(tokenize("   ").empty());
  CHECK(join(tokenize("a  b c")) == "a b c");
}

TEST_CASE("build_vocab") {
  SUBCASE("counting with a cutoff") {
    auto c = corpus_of({"a b c", "a b", "a"});
    auto r = build_vocab(c, 2);
    CHECK(r.vocab.size() == 6);
    CHECK(r.vocab.token(4) == "a");
    CHECK(r.vocab.token(5) == "b");
    CHECK(r.vocab.id("c") == kUnk);
    CHECK(r.coverage == doctest::Approx(5.0 / 6.0));
  }
  SUBCASE("ties are broken lexicographically") {
    auto c = corpus_of({"b a", "a b"});
    auto r = build_vocab(c, 1);
    CHECK(r.vocab.size() == 5);
    CHECK(r.vocab.contains("a"));
    CHECK_FALSE(r.vocab.contains("b"));
  }
  SUBCASE("reserved tokens keep their ids") {
    Vocabulary v;
    CHECK(v.size() == 4);
    CHECK(v.id("<pad>") == kPad);
    CHECK(v.id("<unk>") == kUnk);
    CHECK(v.id("<s>") == kBos);
    CHECK(v.id("</s>") == kEos);
    auto r = build_vocab(corpus_of({"<s> x </s>"}), 5);
    CHECK(r.vocab.size() == 5);
    CHECK(r.vocab.id("<s>") == kBos);
  }
  SUBCASE("size bound and coverage monotonicity") {
    std::vector<Sentence> c;
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      Sentence s;
      for (int k = 0; k < 8; ++k) s.push_back(symbol_token(rng.below(40) * rng.below(40) % 60));
      c.push_back(s);
    }
    double prev = 0.0;
    for (std::size_t m = 0; m <= 70; m += 5) {
      auto r = build_vocab(c, m);
      CHECK(r.vocab.size() <= m + 4);
      CHECK(r.coverage >= prev);
      prev = r.coverage;
    }
    CHECK(prev == 1.0);
  }
  SUBCASE("default size") { CHECK(kDefaultVocabSize == 30000); }
  SUBCASE("empty corpus") {
    std::vector<Sentence> none;
    CHECK_THROWS_AS(build_vocab(none, 10), InvalidInput);
    auto blank = corpus_of({"", " "});
    CHECK_THROWS_AS(build_vocab(blank, 10), InvalidInput);
  }
}

TEST_CASE("encode and decode sentences") {
  auto r = build_vocab(corpus_of({"x y z", "y z", "z"}), 10);
  const Vocabulary& v = r.vocab;
  SUBCASE("round trip over in-vocabulary tokens") {
    Sentence s{"z", "x", "y", "z"};
    CHECK(decode_ids(encode_sentence(s, v), v) == s);
  }
  SUBCASE("unknown tokens") {
    Sentence s{"x", "never", "z"};
    auto ids = encode_sentence(s, v);
    CHECK(ids[1] == kUnk);
    CHECK(decode_ids(ids, v) == Sentence{"x", "<unk>", "z"});
  }
  SUBCASE("table lookup oracle") {
    std::map<std::string, int> table;
    for (std::size_t i = 0; i < v.size(); ++i) table[v.token(static_cast<int>(i))] = static_cast<int>(i);
    Sentence s{"y", "q", "z", "x", "x"};
    auto ids = encode_sentence(s, v);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(ids[i] == (table.count(s[i]) ? table[s[i]] : kUnk));
  }
  SUBCASE("reserved ids vanish when decoding") {
    std::vector<int> ids{kBos, v.id("x"), kPad, kEos};
    CHECK(decode_ids(ids, v) == Sentence{"x"});
  }
  SUBCASE("file round trip") {
    auto path = scratch("vocab.txt");
    v.save(path);
    auto back = Vocabulary::load(path);
    CHECK(std::vector<std::string>(back.tokens().begin(), back.tokens().end()) ==
          std::vector<std::string>(v.tokens().begin(), v.tokens().end()));
    std::ofstream(scratch("bad_vocab.txt")) << "x\ny\n";
    CHECK_THROWS_AS(Vocabulary::load(scratch("bad_vocab.txt")), InvalidInput);
    CHECK_THROWS_AS(Vocabulary::load(scratch("absent.txt")), IoError);
  }
}

TEST_CASE("parallel corpus ingestion") {
  auto src = scratch("src.txt");
  auto tgt = scratch("tgt.txt");
  std::string long_line;
  for (int i = 0; i < 101; ++i) long_line += "w ";
  write_lines(src, std::vector<std::string>{"Hello World", "", long_line, "ok"});
  write_lines(tgt, std::vector<std::string>{"bonjour", "vide", "x", "OK fine"});
  auto c = read_parallel(src, tgt, true);
  REQUIRE(c.src.size() == 2);
  CHECK(c.src[0] == Sentence{"hello", "world"});
  CHECK(c.tgt[1] == Sentence{"ok", "fine"});
  CHECK(c.dropped_empty == 1);
  CHECK(c.dropped_long == 1);
  write_lines(tgt, std::vector<std::string>{"one"});
  CHECK_THROWS_AS(read_parallel(src, tgt), InvalidInput);
  CHECK_THROWS_AS(read_parallel(scratch("nope.txt"), tgt), IoError);
}

TEST_CASE("batching") {
  std::vector<SentencePair> pairs;
  Rng gen(3);
  for (int i = 0; i < 5; ++i) {
    SentencePair p;
    for (std::size_t k = 0, n = 1 + gen.below(6); k < n; ++k) p.src.push_back(4 + static_cast<int>(gen.below(10)));
    for (std::size_t k = 0, n = 1 + gen.below(6); k < n; ++k) p.tgt.push_back(4 + static_cast<int>(gen.below(10)));
    pairs.push_back(p);
  }
  SUBCASE("five pairs in batches of two") {
    Rng rng(1);
    auto batches = make_batches(pairs, 2, rng);
    std::multiset<std::size_t> sizes;
    for (auto& b : batches) sizes.insert(b.size);
    CHECK(sizes == std::multiset<std::size_t>{1, 2, 2});
  }
  SUBCASE("same seed gives the same order") {
    Rng a(7), b(7), c(8);
    auto pa = plan_batches(pairs, 2, a);
    CHECK(pa == plan_batches(pairs, 2, b));
    (void)c;
  }
  SUBCASE("padding carries mask 0 and PAD; masks match lengths") {
    Rng rng(2);
    for (auto& b : make_batches(pairs, 3, rng)) {
      for (std::size_t r = 0; r < b.size; ++r) {
        for (std::size_t i = 0; i < b.src_len; ++i) {
          const bool real = i < b.src_lengths[r];
          CHECK(b.src_mask[r * b.src_len + i] == (real ? 1 : 0));
          if (!real) CHECK(b.src_at(r, i) == kPad);
        }
        for (std::size_t i = 0; i < b.tgt_len; ++i) {
          const bool real = i < b.tgt_lengths[r];
          CHECK(b.tgt_mask[r * b.tgt_len + i] == (real ? 1 : 0));
          if (!real) CHECK(b.tgt_at(r, i) == kPad);
        }
        CHECK(b.tgt_at(r, 0) == kBos);
        CHECK(b.tgt_at(r, b.tgt_lengths[r] - 1) == kEos);
      }
    }
  }
  SUBCASE("every pair appears exactly once") {
    std::vector<SentencePair> many(1000, pairs[0]);
    for (std::size_t i = 0; i < many.size(); ++i) many[i].src.resize(1 + i % 9, 5);
    for (std::size_t bs : {1, 7, 64}) {
      Rng rng(bs);
      auto plan = plan_batches(many, bs, rng);
      std::vector<std::size_t> all;
      for (auto& b : plan) {
        CHECK(b.size() <= bs);
        all.insert(all.end(), b.begin(), b.end());
      }
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> want(many.size());
      for (std::size_t i = 0; i < want.size(); ++i) want[i] = i;
      CHECK(all == want);
    }
  }
  SUBCASE("errors") {
    Rng rng(1);
    std::vector<SentencePair> none;
    CHECK_THROWS_AS(plan_batches(none, 2, rng), InvalidInput);
    CHECK_THROWS_AS(plan_batches(pairs, 0, rng), ConfigError);
  }
}

TEST_CASE("synthetic tasks") {
  SUBCASE("copy is reproducible") {
    SynthSpec s{TaskKind::copy, 50, 3, 10, 16, 9};
    auto a = synth_task(s);
    auto b = synth_task(s);
    CHECK(a.src == b.src);
    CHECK(a.tgt == b.tgt);
    for (std::size_t i = 0; i < a.src.size(); ++i) {
      CHECK(a.src[i] == a.tgt[i]);
      CHECK(a.src[i].size() >= 3);
      CHECK(a.src[i].size() <= 10);
    }
    s.seed = 10;
    CHECK(synth_task(s).src != a.src);
  }
  SUBCASE("reverse") {
    auto c = synth_task({TaskKind::reverse, 20, 1, 6, 5, 1});
    for (std::size_t i = 0; i < c.src.size(); ++i) {
      Sentence r(c.src[i].rbegin(), c.src[i].rend());
      CHECK(c.tgt[i] == r);
    }
    Sentence abc{"a", "b", "c"};
    CHECK(Sentence(abc.rbegin(), abc.rend()) == Sentence{"c", "b", "a"});
  }
  SUBCASE("funcword windows") {
    CHECK(funcword_target(Sentence{"a", "b", "c", "d"}) == Sentence{"f2", "A", "B", "C", "f0", "D"});
    CHECK(funcword_target(Sentence{"w30", "w27"}) == Sentence{"f1", "W30", "W27"});
    auto c = synth_task({TaskKind::funcword, 300, 2, 12, 30, 4});
    for (std::size_t i = 0; i < c.src.size(); ++i) CHECK(funcword_consistent(c.src[i], c.tgt[i]));
    // The checker rejects a wrong count, a wrong window size and a bad translation.
    CHECK_FALSE(funcword_consistent(Sentence{"a", "b", "c"}, Sentence{"f1", "A", "B", "C"}));
    CHECK_FALSE(funcword_consistent(Sentence{"a", "b", "c"}, Sentence{"f1", "A", "f0", "B", "C"}));
    CHECK_FALSE(funcword_consistent(Sentence{"a", "b"}, Sentence{"f1", "A", "C"}));
  }
  SUBCASE("symbol names") {
    CHECK(symbol_token(0) == "a");
    CHECK(symbol_token(25) == "z");
    CHECK(symbol_token(26) == "w26");
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(synth_task({TaskKind::copy, 0, 3, 10, 16, 1}), ConfigError);
    CHECK_THROWS_AS(synth_task({TaskKind::copy, 5, 4, 3, 16, 1}), ConfigError);
    CHECK_THROWS_AS(synth_task({TaskKind::copy, 5, 3, 4, 0, 1}), ConfigError);
  }
}
