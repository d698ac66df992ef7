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

#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "sact/errors.hpp"
#include "sact/eval/sweep.hpp"

namespace sact::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string show(double v) { return eval::format_number(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(std::size_t v) { return std::to_string(v); }
std::string show(const std::filesystem::path& p) { return p.string(); }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SACT_PATH(KEY, MEMBER)                                                                     \
  Field {                                                                                          \
    KEY, [](RunConfig& c, const std::string&, const std::string& v) { c.MEMBER = v; },           \
        [](const RunConfig& c) { return show(c.MEMBER); }                                         \
  }
#define SACT_SIZE(KEY, MEMBER)                                                                     \
  Field {                                                                                          \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                           \
      c.MEMBER = parse_int<std::size_t>(k, v);                                                     \
    },                                                                                             \
        [](const RunConfig& c) { return show(c.MEMBER); }                                         \
  }
#define SACT_REAL(KEY, MEMBER)                                                                     \
  Field {                                                                                          \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_real(k, v); }, \
        [](const RunConfig& c) { return show(c.MEMBER); }                                         \
  }
#define SACT_FLAG(KEY, MEMBER)                                                                     \
  Field {                                                                                          \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_flag(k, v); }, \
        [](const RunConfig& c) { return show(c.MEMBER); }                                         \
  }

std::string attention_name(const attention::TemperaturePolicy& p) {
  switch (p.mode) {
    case attention::TemperatureMode::adaptive: return "sact";
    case attention::TemperatureMode::fixed: return "fixed";
    case attention::TemperatureMode::conventional: return "conventional";
  }
  return "sact";
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"run.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_int<std::uint64_t>(k, v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      SACT_PATH("run.out", out),
      Field{"run.precision",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "64") c.train.precision = Precision::f64;
              else if (v == "32") c.train.precision = Precision::f32;
              else throw ConfigError(k + ": expected 64 or 32, got '" + v + "'");
            },
            [](const RunConfig& c) { return std::string(c.train.precision == Precision::f64 ? "64" : "32"); }},

      SACT_PATH("data.train_src", data.train_src),
      SACT_PATH("data.train_tgt", data.train_tgt),
      SACT_PATH("data.valid_src", data.valid_src),
      SACT_PATH("data.valid_tgt", data.valid_tgt),
      SACT_PATH("data.test_src", data.test_src),
      SACT_PATH("data.test_tgt", data.test_tgt),
      SACT_PATH("data.src_vocab", data.src_vocab),
      SACT_PATH("data.tgt_vocab", data.tgt_vocab),
      SACT_FLAG("data.lowercase", data.lowercase),
      SACT_SIZE("data.max_len", data.max_len),
      SACT_SIZE("data.vocab_size", data.vocab_size),

      Field{"synth.task",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v.empty() || v == "none") {
                c.synth.task.reset();
                return;
              }
              auto t = data::parse_task(v);
              if (!t) throw ConfigError(k + ": expected copy, reverse, funcword or none, got '" + v + "'");
              c.synth.task = *t;
            },
            [](const RunConfig& c) { return c.synth.task ? data::task_name(*c.synth.task) : std::string("none"); }},
      SACT_SIZE("synth.train_size", synth.train_size),
      SACT_SIZE("synth.valid_size", synth.valid_size),
      SACT_SIZE("synth.test_size", synth.test_size),
      SACT_SIZE("synth.min_len", synth.min_len),
      SACT_SIZE("synth.max_len", synth.max_len),
      SACT_SIZE("synth.vocab_size", synth.vocab_size),
      Field{"synth.seed",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v.empty() || v == "run") c.synth.seed.reset();
              else c.synth.seed = parse_int<std::uint64_t>(k, v);
            },
            [](const RunConfig& c) { return c.synth.seed ? std::to_string(*c.synth.seed) : std::string("run"); }},

      SACT_SIZE("model.embed_dim", model.embed_dim),
      SACT_SIZE("model.hidden_dim", model.hidden_dim),
      SACT_REAL("model.lambda", model.lambda),
      SACT_REAL("model.dropout", model.dropout_rate),
      SACT_SIZE("model.max_decode_factor", model.max_decode_factor),
      SACT_SIZE("model.max_decode_offset", model.max_decode_offset),
      Field{"model.attention",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "sact" || v == "adaptive") c.model.temperature.mode = attention::TemperatureMode::adaptive;
              else if (v == "fixed") c.model.temperature.mode = attention::TemperatureMode::fixed;
              else if (v == "conventional") c.model.temperature.mode = attention::TemperatureMode::conventional;
              else throw ConfigError(k + ": expected sact, fixed or conventional, got '" + v + "'");
            },
            [](const RunConfig& c) { return attention_name(c.model.temperature); }},
      SACT_REAL("model.fixed_tau", model.temperature.fixed_tau),

      SACT_SIZE("train.batch_size", train.batch_size),
      SACT_REAL("train.clip_norm", train.clip_norm),
      SACT_SIZE("train.max_steps", train.max_steps),
      SACT_SIZE("train.epochs", train.epochs),
      SACT_SIZE("train.eval_interval", train.eval_interval),
      SACT_REAL("train.lr", train.adam.lr),
      SACT_REAL("train.beta1", train.adam.beta1),
      SACT_REAL("train.beta2", train.adam.beta2),
      SACT_REAL("train.adam_eps", train.adam.eps),
      SACT_FLAG("train.record_wall_time", train.record_wall_time),
      SACT_FLAG("train.eval_test", eval_test),

      Field{"sweep.grid",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.grid.clear();
              for (const auto& item : split_list(v)) c.grid.push_back(parse_real(k, item));
            },
            [](const RunConfig& c) {
              std::string out;
              for (double t : c.grid.empty() ? eval::default_grid() : c.grid) out += (out.empty() ? "" : ",") + show(t);
              return out;
            }},
      Field{"sweep.seeds",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.seeds.clear();
              for (const auto& item : split_list(v)) c.seeds.push_back(parse_int<std::uint64_t>(k, item));
            },
            [](const RunConfig& c) {
              std::string out;
              auto seeds = c.seeds.empty() ? std::vector<std::uint64_t>{c.seed, c.seed + 1, c.seed + 2} : c.seeds;
              for (auto s : seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
              return out;
            }},
      SACT_FLAG("sweep.zero_controller_init", zero_controller_init),

      SACT_SIZE("translate.beam", beam),
      SACT_REAL("gradcheck.eps", gradcheck_eps),
  };
  return table;
}

#undef SACT_PATH
#undef SACT_SIZE
#undef SACT_REAL
#undef SACT_FLAG

void require_file(const std::string& key, const std::filesystem::path& p) {
  if (p.empty()) throw ConfigError(key + ": required");
  if (!std::filesystem::is_regular_file(p)) throw ConfigError(key + ": file not found: " + p.string());
}

void require_pair(const std::string& name, const std::filesystem::path& src, const std::filesystem::path& tgt) {
  if (src.empty() && tgt.empty()) return;
  require_file("data." + name + "_src", src);
  require_file("data." + name + "_tgt", tgt);
}

}  // namespace

Settings parse_settings(const std::string& text, const std::string& origin) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::string section = "run";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ConfigError(where + ": malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    out.emplace_back(key.find('.') == std::string::npos ? section + "." + key : key, trim(t.substr(eq + 1)));
  }
  return out;
}

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str(), path.string());
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError(key + ": unknown configuration key");
}

void apply_settings(RunConfig& config, const Settings& settings) {
  for (const auto& [k, v] : settings) apply_setting(config, k, v);
}

std::string render_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      out += (out.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void RunConfig::validate(Command command) const {
  if (out.empty()) throw ConfigError("run.out: must not be empty");
  if (!(model.lambda >= 2.0 && model.lambda <= 10.0)) throw ConfigError("model.lambda: must lie in [2, 10]");
  if (!(model.dropout_rate >= 0.0 && model.dropout_rate < 1.0)) throw ConfigError("model.dropout: must lie in [0, 1)");
  if (model.embed_dim == 0) throw ConfigError("model.embed_dim: must be positive");
  if (model.hidden_dim == 0) throw ConfigError("model.hidden_dim: must be positive");
  if (model.temperature.mode == attention::TemperatureMode::fixed && !(model.temperature.fixed_tau > 0.0))
    throw ConfigError("model.fixed_tau: must be positive");
  if (data.max_len == 0) throw ConfigError("data.max_len: must be positive");
  if (data.vocab_size == 0) throw ConfigError("data.vocab_size: must be positive");
  if (beam == 0) throw ConfigError("translate.beam: must be at least 1");
  if (!(gradcheck_eps >= 1e-7 && gradcheck_eps <= 1e-4)) throw ConfigError("gradcheck.eps: must lie in [1e-7, 1e-4]");
  train.validate();

  auto check_data = [&]() {
    if (synth.task) {
      if (synth.train_size == 0) throw ConfigError("synth.train_size: must be positive");
      if (synth.min_len == 0 || synth.min_len > synth.max_len)
        throw ConfigError("synth.min_len: must be positive and not exceed synth.max_len");
      if (synth.vocab_size == 0) throw ConfigError("synth.vocab_size: must be positive");
      return;
    }
    require_file("data.train_src", data.train_src);
    require_file("data.train_tgt", data.train_tgt);
    require_pair("valid", data.valid_src, data.valid_tgt);
    require_pair("test", data.test_src, data.test_tgt);
    if (!data.src_vocab.empty()) require_file("data.src_vocab", data.src_vocab);
    if (!data.tgt_vocab.empty()) require_file("data.tgt_vocab", data.tgt_vocab);
  };

  switch (command) {
    case Command::train:
      check_data();
      break;
    case Command::sweep: {
      check_data();
      if (!synth.task && data.test_src.empty()) throw ConfigError("data.test_src: required for a sweep");
      const auto g = grid.empty() ? eval::default_grid() : grid;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0)) throw ConfigError("sweep.grid: values must be positive");
        if (i && !(g[i] > g[i - 1])) throw ConfigError("sweep.grid: values must be strictly increasing");
      }
      break;
    }
    case Command::synth:
      if (!synth.task) throw ConfigError("synth.task: required");
      check_data();
      break;
    case Command::gradcheck:
      if (train.precision != Precision::f64) throw ConfigError("run.precision: gradcheck needs 64-bit mode");
      break;
    case Command::translate:
      if (!data.src_vocab.empty()) require_file("data.src_vocab", data.src_vocab);
      if (!data.tgt_vocab.empty()) require_file("data.tgt_vocab", data.tgt_vocab);
      break;
    case Command::eval:
      break;
  }
}

}  // namespace sact::cli
