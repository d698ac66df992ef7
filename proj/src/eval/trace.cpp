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

#include "sact/eval/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sact/data/corpus.hpp"
#include "sact/errors.hpp"

namespace sact::eval {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string str(const std::string& s) { return nlohmann::json(s).dump(); }

std::string num_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v[i]);
  }
  return out + "]";
}

std::string str_array(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += str(v[i]);
  }
  return out + "]";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write on " + path.string());
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidInput("trace: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

void AttentionTrace::validate() const {
  const std::size_t steps = alpha.size();
  if (tau.size() != steps || beta.size() != steps || tgt_tokens.size() != steps)
    throw InvalidInput("trace: alpha, tau, beta and target tokens disagree in length");
  if (!(lambda > 1.0)) throw InvalidInput("trace: lambda must exceed 1");
  for (std::size_t t = 0; t < steps; ++t) {
    if (alpha[t].size() != src_tokens.size())
      throw InvalidInput("trace: row " + std::to_string(t) + " has " + std::to_string(alpha[t].size()) +
                         " entries for " + std::to_string(src_tokens.size()) + " source tokens");
    double sum = 0.0;
    for (double a : alpha[t]) {
      if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("trace: alpha entry outside [0, 1] in row " + std::to_string(t));
      sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidInput("trace: row " + std::to_string(t) + " sums to " + num(sum));
    if (!(tau[t] > 1.0 / lambda && tau[t] < lambda))
      throw InvalidInput("trace: tau " + num(tau[t]) + " at step " + std::to_string(t) + " outside (1/lambda, lambda)");
  }
}

AttentionTrace make_trace(const std::vector<std::string>& src_tokens, const seq2seq::DecodeResult& decoded,
                          const data::Vocabulary& tgt_vocab, double lambda) {
  AttentionTrace t;
  t.src_tokens = src_tokens;
  for (int id : decoded.ids) t.tgt_tokens.push_back(tgt_vocab.token(id));
  if (decoded.alpha.size() > decoded.ids.size()) t.tgt_tokens.emplace_back(data::kEosToken);
  t.alpha = decoded.alpha;
  t.tau = decoded.tau;
  t.beta = decoded.beta;
  t.lambda = lambda;
  return t;
}

std::string trace_to_json(const AttentionTrace& t) {
  std::string out = "{\"src_tokens\":" + str_array(t.src_tokens) + ",\"tgt_tokens\":" + str_array(t.tgt_tokens) +
                    ",\"alpha\":[";
  for (std::size_t i = 0; i < t.alpha.size(); ++i) {
    if (i) out += ',';
    out += num_array(t.alpha[i]);
  }
  out += "],\"tau\":" + num_array(t.tau) + ",\"beta\":" + num_array(t.beta) + ",\"lambda\":" + num(t.lambda) + "}\n";
  return out;
}

AttentionTrace trace_from_json(const std::string& text) {
  AttentionTrace t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.src_tokens = j.at("src_tokens").get<std::vector<std::string>>();
    t.tgt_tokens = j.at("tgt_tokens").get<std::vector<std::string>>();
    t.alpha = j.at("alpha").get<std::vector<std::vector<double>>>();
    t.tau = j.at("tau").get<std::vector<double>>();
    t.beta = j.at("beta").get<std::vector<double>>();
    t.lambda = j.at("lambda").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("trace: ") + e.what());
  }
  return t;
}

std::string trace_to_tsv(const AttentionTrace& t) {
  std::string out;
  for (const auto& s : t.src_tokens) out += s + '\t';
  out += "tau\n";
  for (std::size_t i = 0; i < t.alpha.size(); ++i) {
    for (double a : t.alpha[i]) out += num(a) + '\t';
    out += num(t.tau[i]) + '\n';
  }
  return out;
}

TsvTrace trace_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("trace tsv: missing header");
  auto header = split_tabs(line);
  if (header.empty() || header.back() != "tau") throw InvalidInput("trace tsv: header must end with tau");
  TsvTrace t;
  t.src_tokens.assign(header.begin(), header.end() - 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != header.size()) throw InvalidInput("trace tsv: ragged row");
    std::vector<double> row;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) row.push_back(parse_double(cells[i]));
    t.alpha.push_back(std::move(row));
    t.tau.push_back(parse_double(cells.back()));
  }
  return t;
}

void export_trace(const AttentionTrace& trace, const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  auto tsv_path = stem;
  tsv_path += ".tsv";
  write_file(json_path, trace_to_json(trace));
  write_file(tsv_path, trace_to_tsv(trace));
}

AttentionTrace load_trace(const std::filesystem::path& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + json_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_json(ss.str());
}

}  // namespace sact::eval
