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

#include "sact/data/synth.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "sact/errors.hpp"

namespace sact::data {

namespace {

std::optional<std::size_t> symbol_index(std::string_view tok) {
  if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'z') return static_cast<std::size_t>(tok[0] - 'a');
  if (tok.size() > 1 && tok[0] == 'w') {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    if (ec == std::errc() && p == tok.data() + tok.size()) return v;
  }
  return std::nullopt;
}

bool is_function_token(std::string_view tok) {
  return tok.size() == 2 && tok[0] == 'f' && tok[1] >= '0' && tok[1] <= '3';
}

std::string upper(std::string_view tok) {
  std::string out(tok);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<TaskKind> parse_task(std::string_view name) {
  if (name == "copy") return TaskKind::copy;
  if (name == "reverse") return TaskKind::reverse;
  if (name == "funcword") return TaskKind::funcword;
  return std::nullopt;
}

std::string task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::copy: return "copy";
    case TaskKind::reverse: return "reverse";
    case TaskKind::funcword: return "funcword";
  }
  return "copy";
}

std::string symbol_token(std::size_t index) {
  if (index < 26) return std::string(1, static_cast<char>('a' + index));
  return "w" + std::to_string(index);
}

Sentence funcword_target(std::span<const std::string> src) {
  Sentence out;
  for (std::size_t start = 0; start < src.size(); start += kFuncwordWindow) {
    const std::size_t end = std::min(src.size(), start + kFuncwordWindow);
    std::size_t even = 0;
    for (std::size_t i = start; i < end; ++i) {
      auto idx = symbol_index(src[i]);
      if (!idx) throw InvalidInput("funcword: '" + src[i] + "' is not a content symbol");
      even += (*idx % 2 == 0) ? 1 : 0;
    }
    out.push_back("f" + std::to_string(even));
    for (std::size_t i = start; i < end; ++i) out.push_back(upper(src[i]));
  }
  return out;
}

bool funcword_consistent(std::span<const std::string> src, std::span<const std::string> tgt) {
  std::size_t s = 0;
  std::size_t t = 0;
  while (t < tgt.size()) {
    const std::string& f = tgt[t++];
    if (!is_function_token(f)) return false;
    const int claimed = f[1] - '0';
    int even = 0;
    std::size_t n = 0;
    while (t < tgt.size() && !is_function_token(tgt[t])) {
      if (s >= src.size() || n == kFuncwordWindow) return false;
      std::string lowered = tgt[t];
      for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lowered != src[s]) return false;
      auto idx = symbol_index(src[s]);
      if (!idx) return false;
      if (*idx % 2 == 0) ++even;
      ++s;
      ++t;
      ++n;
    }
    if (n == 0 || even != claimed) return false;
    if (n < kFuncwordWindow && s != src.size()) return false;
  }
  return s == src.size() && !tgt.empty();
}

ParallelCorpus synth_task(const SynthSpec& spec) {
  if (spec.size == 0) throw ConfigError("synth: size must be positive");
  if (spec.vocab_size == 0) throw ConfigError("synth: vocab_size must be positive");
  if (spec.min_len == 0 || spec.min_len > spec.max_len) throw ConfigError("synth: bad length range");
  Rng rng = Rng(spec.seed).split("synth:" + task_name(spec.kind));
  ParallelCorpus c;
  for (std::size_t k = 0; k < spec.size; ++k) {
    const std::size_t len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
    Sentence src(len);
    for (auto& tok : src) tok = symbol_token(rng.below(spec.vocab_size));
    Sentence tgt;
    switch (spec.kind) {
      case TaskKind::copy: tgt = src; break;
      case TaskKind::reverse: tgt.assign(src.rbegin(), src.rend()); break;
      case TaskKind::funcword: tgt = funcword_target(src); break;
    }
    c.src.push_back(std::move(src));
    c.tgt.push_back(std::move(tgt));
  }
  return c;
}

}  // namespace sact::data
