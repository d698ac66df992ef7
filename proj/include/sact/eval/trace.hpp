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

#include <filesystem>
#include <string>
#include <vector>

#include "sact/data/vocab.hpp"
#include "sact/seq2seq/model.hpp"

namespace sact::eval {

/// Per-step record of one decoded sentence: one alpha row over the source
/// positions, one tau and one beta per decoding step. tgt_tokens holds the
/// token emitted at each step, so the final entry is "</s>" when decoding
/// ended on EOS rather than at the length cap.
struct AttentionTrace {
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  std::vector<std::vector<double>> alpha;
  std::vector<double> tau;
  std::vector<double> beta;
  double lambda = 4.0;

  // Throws InvalidInput when a row does not sum to 1 within 1e-6, a row has
  // the wrong width, a tau lies outside (1/lambda, lambda), or the per-step
  // vectors disagree in length.
  void validate() const;
};

AttentionTrace make_trace(const std::vector<std::string>& src_tokens, const seq2seq::DecodeResult& decoded,
                          const data::Vocabulary& tgt_vocab, double lambda);

// JSON: {"src_tokens", "tgt_tokens", "alpha", "tau", "beta", "lambda"} with
// every number written to 17 significant digits.
std::string trace_to_json(const AttentionTrace& trace);
AttentionTrace trace_from_json(const std::string& text);

// TSV: a header of source tokens then "tau"; one row per decoding step with
// the alpha entries and tau as the final column.
std::string trace_to_tsv(const AttentionTrace& trace);

struct TsvTrace {
  std::vector<std::string> src_tokens;
  std::vector<std::vector<double>> alpha;
  std::vector<double> tau;
};
TsvTrace trace_from_tsv(const std::string& text);

// Writes <stem>.json and <stem>.tsv. Throws IoError naming the path.
void export_trace(const AttentionTrace& trace, const std::filesystem::path& stem);
AttentionTrace load_trace(const std::filesystem::path& json_path);

}  // namespace sact::eval
