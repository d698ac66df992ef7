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

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sact/data/corpus.hpp"
#include "sact/data/synth.hpp"
#include "sact/data/vocab.hpp"
#include "sact/errors.hpp"
#include "sact/eval/bleu.hpp"
#include "sact/eval/sweep.hpp"
#include "sact/eval/trace.hpp"
#include "sact/eval/translate.hpp"
#include "sact/seq2seq/checkpoint.hpp"
#include "sact/seq2seq/gradcheck.hpp"

namespace sact::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigEcho = "effective_config.ini";

struct LoadedData {
  data::ParallelCorpus train, valid, test;
  data::Vocabulary src_vocab, tgt_vocab;
  std::vector<data::SentencePair> train_pairs, valid_pairs, test_pairs;
};

data::ParallelCorpus slice(const data::ParallelCorpus& c, std::size_t begin, std::size_t end) {
  data::ParallelCorpus out;
  out.src.assign(c.src.begin() + static_cast<std::ptrdiff_t>(begin), c.src.begin() + static_cast<std::ptrdiff_t>(end));
  out.tgt.assign(c.tgt.begin() + static_cast<std::ptrdiff_t>(begin), c.tgt.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

LoadedData load_data(const RunConfig& config) {
  LoadedData d;
  if (config.synth.task) {
    const auto& s = config.synth;
    const std::size_t total = s.train_size + s.valid_size + s.test_size;
    auto all = data::synth_task({*s.task, total, s.min_len, s.max_len, s.vocab_size, s.seed.value_or(config.seed)});
    d.train = slice(all, 0, s.train_size);
    d.valid = slice(all, s.train_size, s.train_size + s.valid_size);
    d.test = slice(all, s.train_size + s.valid_size, total);
  } else {
    const auto& p = config.data;
    d.train = data::read_parallel(p.train_src, p.train_tgt, p.lowercase, p.max_len);
    if (!p.valid_src.empty()) d.valid = data::read_parallel(p.valid_src, p.valid_tgt, p.lowercase, p.max_len);
    if (!p.test_src.empty()) d.test = data::read_parallel(p.test_src, p.test_tgt, p.lowercase, p.max_len);
  }
  if (d.train.src.empty()) throw InvalidInput("data.train_src: no usable sentence pairs");
  d.src_vocab = config.data.src_vocab.empty() ? data::build_vocab(d.train.src, config.data.vocab_size).vocab
                                              : data::Vocabulary::load(config.data.src_vocab);
  d.tgt_vocab = config.data.tgt_vocab.empty() ? data::build_vocab(d.train.tgt, config.data.vocab_size).vocab
                                              : data::Vocabulary::load(config.data.tgt_vocab);
  d.train_pairs = data::encode_corpus(d.train, d.src_vocab, d.tgt_vocab);
  d.valid_pairs = data::encode_corpus(d.valid, d.src_vocab, d.tgt_vocab);
  d.test_pairs = data::encode_corpus(d.test, d.src_vocab, d.tgt_vocab);
  return d;
}

seq2seq::ModelConfig model_for(const RunConfig& config, const LoadedData& d) {
  seq2seq::ModelConfig m = config.model;
  m.src_vocab_size = d.src_vocab.size();
  m.tgt_vocab_size = d.tgt_vocab.size();
  m.validate();
  return m;
}

void prepare_out(const RunConfig& config) {
  fs::create_directories(config.out);
  std::ofstream echo(config.out / kConfigEcho, std::ios::binary | std::ios::trunc);
  if (!echo) throw IoError("cannot write " + (config.out / kConfigEcho).string());
  echo << render_config(config);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int cmd_train(const RunConfig& config, bool resume, std::ostream& out, std::ostream& err) {
  config.validate(Command::train);
  LoadedData d = load_data(config);
  const auto mc = model_for(config, d);
  const fs::path last = config.out / "last.ckpt";
  if (resume && !fs::is_regular_file(last)) throw ConfigError("--resume: no checkpoint at " + last.string());

  seq2seq::ModelParams params;
  training::OptimizerState state;
  if (resume) {
    auto ck = training::load_training_checkpoint(last);
    auto expected = seq2seq::ModelParams::zeros(mc);
    seq2seq::check_same_shapes(expected, ck.params);
    params = std::move(ck.params);
    state = std::move(ck.state);
  } else {
    Rng init = Rng(config.seed).split("init");
    params = seq2seq::init_params(mc, init);
  }

  prepare_out(config);
  d.src_vocab.save(config.out / "src.vocab");
  d.tgt_vocab.save(config.out / "tgt.vocab");

  training::TrainConfig tc = config.train;
  tc.seed = config.seed;
  tc.log_path = config.out / "train_log.jsonl";
  tc.checkpoint_dir = config.out;
  err << "seed " << config.seed << ", " << d.train_pairs.size() << " training pairs, " << d.valid_pairs.size()
      << " validation pairs\n";
  auto result = training::train(mc, params, state, d.train_pairs, d.valid_pairs, tc);

  out << "steps " << result.steps;
  if (!result.log.empty()) out << " final_loss " << eval::format_number(result.log.back().loss);
  if (!result.evals.empty())
    out << " best_valid_loss " << eval::format_number(result.best_valid_loss) << " best_step " << result.best_step;
  out << "\n";

  if (config.eval_test && !d.test_pairs.empty()) {
    seq2seq::ModelParams scored = std::move(params);
    if (!result.evals.empty() && fs::is_regular_file(config.out / "best.ckpt"))
      scored = seq2seq::load_checkpoint(config.out / "best.ckpt").params;
    const auto hyps = eval::greedy_translate(d.test_pairs, scored, mc, tc.precision);
    out << "test exact_match " << eval::format_number(eval::exact_match_rate(hyps, d.test_pairs)) << " bleu "
        << fixed2(eval::bleu_ids(hyps, d.test_pairs)) << "\n";
  }
  return kExitOk;
}

int cmd_translate(const RunConfig& config, const TranslateArgs& args, std::ostream& out, std::ostream& err) {
  config.validate(Command::translate);
  if (args.checkpoint.empty()) throw ConfigError("--checkpoint: required");
  if (!fs::is_regular_file(args.checkpoint)) throw ConfigError("--checkpoint: file not found: " + args.checkpoint.string());
  if (args.input.empty()) throw ConfigError("--input: required");
  if (!fs::is_regular_file(args.input)) throw ConfigError("--input: file not found: " + args.input.string());
  if (args.trace && config.beam > 1) throw ConfigError("translate.beam: traces need greedy decoding (beam 1)");

  const fs::path dir = args.checkpoint.parent_path();
  const fs::path sv_path = config.data.src_vocab.empty() ? dir / "src.vocab" : config.data.src_vocab;
  const fs::path tv_path = config.data.tgt_vocab.empty() ? dir / "tgt.vocab" : config.data.tgt_vocab;
  if (!fs::is_regular_file(sv_path)) throw ConfigError("data.src_vocab: file not found: " + sv_path.string());
  if (!fs::is_regular_file(tv_path)) throw ConfigError("data.tgt_vocab: file not found: " + tv_path.string());
  const auto sv = data::Vocabulary::load(sv_path);
  const auto tv = data::Vocabulary::load(tv_path);

  auto ck = seq2seq::load_checkpoint(args.checkpoint);
  seq2seq::ModelConfig mc = args.config_given ? config.model : ck.config;
  mc.src_vocab_size = sv.size();
  mc.tgt_vocab_size = tv.size();
  mc.validate();
  {
    auto expected = seq2seq::ModelParams::zeros(mc);
    seq2seq::check_same_shapes(expected, ck.params);
  }
  const auto lines = data::read_lines(args.input);

  prepare_out(config);
  if (args.trace) fs::create_directories(config.out / "traces");
  std::vector<std::string> translated;
  translated.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = data::tokenize(lines[i], config.data.lowercase);
    if (tokens.empty()) {
      translated.emplace_back();
      continue;
    }
    const auto src = data::encode_sentence(tokens, sv);
    std::vector<int> ids;
    if (config.beam > 1) {
      ids = seq2seq::beam_decode(src, ck.params, mc, config.beam, std::nullopt, config.train.precision).ids;
    } else {
      auto dec = seq2seq::greedy_decode(src, ck.params, mc, std::nullopt, config.train.precision);
      ids = dec.ids;
      if (args.trace) {
        auto trace = eval::make_trace(tokens, dec, tv, mc.lambda);
        trace.validate();
        char stem[32];
        std::snprintf(stem, sizeof stem, "sent_%06zu", i + 1);
        eval::export_trace(trace, config.out / "traces" / stem);
      }
    }
    translated.push_back(data::join(data::decode_ids(ids, tv)));
  }
  data::write_lines(config.out / "translations.txt", translated);
  err << "translated " << lines.size() << " lines into " << (config.out / "translations.txt").string() << "\n";
  out << (config.out / "translations.txt").string() << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& hyp, const fs::path& ref, std::size_t max_n, std::ostream& out) {
  const auto h = data::read_lines(hyp);
  const auto r = data::read_lines(ref);
  if (h.size() != r.size())
    throw InvalidInput("eval: " + std::to_string(h.size()) + " hypothesis lines but " + std::to_string(r.size()) +
                       " reference lines");
  std::vector<data::Sentence> hs, rs;
  for (const auto& l : h) hs.push_back(data::tokenize(l, true));
  for (const auto& l : r) rs.push_back(data::tokenize(l, true));
  out << fixed2(eval::bleu(hs, rs, max_n)) << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate(Command::sweep);
  LoadedData d = load_data(config);
  eval::SweepConfig sc;
  sc.model = model_for(config, d);
  sc.train = config.train;
  sc.grid = config.grid.empty() ? eval::default_grid() : config.grid;
  sc.seeds = config.seeds.empty() ? std::vector<std::uint64_t>{config.seed, config.seed + 1, config.seed + 2}
                                  : config.seeds;
  sc.zero_controller_init = config.zero_controller_init;
  sc.run_dir = config.out / "cells";
  sc.validate();
  eval::SweepTask task{d.train_pairs, d.valid_pairs, d.test_pairs};
  if (task.test.empty()) throw InvalidInput("sweep: empty test set");

  prepare_out(config);
  auto result = eval::sweep_temperature(task, sc, [&err](const eval::SweepCell& c) {
    err << "cell tau=" << c.label << " seed=" << c.seed;
    if (c.ok)
      err << " bleu=" << fixed2(c.bleu) << "\n";
    else
      err << " failed: " << c.error << "\n";
    err.flush();
  });
  std::ofstream csv(config.out / "sweep.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot write " + (config.out / "sweep.csv").string());
  csv << eval::sweep_to_csv(result);
  csv.close();

  out << eval::median_table(result);
  if (auto best = result.best_fixed_tau())
    out << "best fixed tau " << eval::format_number(*best) << " median " << fixed2(*result.fixed_median(*best)) << "\n";
  if (auto s = result.sact_median()) out << "sact median " << fixed2(*s) << "\n";
  if (result.failures() == result.cells.size()) {
    err << "every sweep cell failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, const std::string& fault_group, std::ostream& out, std::ostream& err) {
  config.validate(Command::gradcheck);
  seq2seq::ModelGradCheckOptions opts;
  opts.seed = config.seed;
  opts.eps = config.gradcheck_eps;
  opts.fault_group = fault_group;
  const auto report = seq2seq::check_model_gradients(opts);
  constexpr double kTolerance = 1e-4;
  std::vector<std::string> failing;
  out << std::left << std::setw(16) << "group" << std::right << std::setw(15) << "max_rel_error" << std::setw(9)
      << "entries" << "  status\n";
  for (const auto& g : report.groups) {
    const bool ok = g.max_rel_error < kTolerance;
    if (!ok) failing.push_back(g.name);
    char err_buf[32];
    std::snprintf(err_buf, sizeof err_buf, "%.3e", g.max_rel_error);
    out << std::left << std::setw(16) << g.name << std::right << std::setw(15) << err_buf << std::setw(9) << g.entries
        << "  " << (ok ? "ok" : "FAIL") << "\n";
  }
  char max_buf[32];
  std::snprintf(max_buf, sizeof max_buf, "%.3e", report.max_rel_error);
  out << "max relative error " << max_buf << " (tolerance 1e-4)\n";
  if (!failing.empty()) {
    err << "gradient check failed for:";
    for (const auto& f : failing) err << " " << f;
    err << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate(Command::synth);
  LoadedData d = load_data(config);
  prepare_out(config);
  for (auto [name, corpus] : {std::pair<const char*, const data::ParallelCorpus*>{"train", &d.train},
                              {"valid", &d.valid},
                              {"test", &d.test}}) {
    data::write_corpus(config.out / (std::string(name) + ".src"), corpus->src);
    data::write_corpus(config.out / (std::string(name) + ".tgt"), corpus->tgt);
  }
  err << "wrote " << d.train.src.size() << "/" << d.valid.src.size() << "/" << d.test.src.size()
      << " train/valid/test pairs\n";
  out << config.out.string() << "\n";
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-based translation with self-adaptive attention temperature"};
  app.require_subcommand(1);

  struct Shared {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> precision;
    std::optional<std::string> out;
    std::vector<std::string> sets;
  };
  Shared shared;
  auto add_shared = [&shared](CLI::App* sub) {
    sub->add_option("--config", shared.config, "Configuration file");
    sub->add_option("--seed", shared.seed, "Seed for every random stream (default 42)");
    sub->add_option("--precision", shared.precision, "Arithmetic precision")->check(CLI::IsMember({"64", "32"}));
    sub->add_option("--out", shared.out, "Output directory");
    sub->add_option("--set", shared.sets, "Override one setting, section.key=value");
  };

  auto* train = app.add_subcommand("train", "Train a model");
  add_shared(train);
  bool resume = false;
  train->add_flag("--resume", resume, "Continue from <out>/last.ckpt");

  auto* translate = app.add_subcommand("translate", "Translate a file line by line");
  add_shared(translate);
  TranslateArgs targs;
  std::string ckpt, input;
  translate->add_option("--checkpoint", ckpt, "Model checkpoint");
  translate->add_option("--input", input, "Source sentences, one per line");
  translate->add_flag("--trace", targs.trace, "Write per-sentence attention traces");

  auto* evalc = app.add_subcommand("eval", "Corpus BLEU of a hypothesis file against a reference file");
  std::string hyp, ref;
  std::size_t max_n = 4;
  evalc->add_option("hypotheses", hyp, "Hypothesis file")->required();
  evalc->add_option("references", ref, "Reference file")->required();
  evalc->add_option("--max-n", max_n, "Highest n-gram order")->check(CLI::Range(1, 9));

  auto* sweep = app.add_subcommand("sweep", "Fixed-temperature sweep against the adaptive model");
  add_shared(sweep);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the reference model");
  add_shared(gradcheck);
  std::string fault;
  gradcheck->add_option("--inject-fault", fault, "Corrupt the adjoint of one parameter group");

  auto* synth = app.add_subcommand("synth", "Write a synthetic parallel corpus");
  add_shared(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    RunConfig config;
    if (!shared.config.empty()) apply_settings(config, read_settings(shared.config));
    for (const auto& s : shared.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set: expected section.key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (shared.seed) config.seed = *shared.seed;
    if (shared.precision) apply_setting(config, "run.precision", *shared.precision);
    if (shared.out) config.out = *shared.out;

    if (train->parsed()) return cmd_train(config, resume, out, err);
    if (translate->parsed()) {
      targs.checkpoint = ckpt;
      targs.input = input;
      targs.config_given = !shared.config.empty();
      return cmd_translate(config, targs, out, err);
    }
    if (evalc->parsed()) return cmd_eval(hyp, ref, max_n, out);
    if (sweep->parsed()) return cmd_sweep(config, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(config, fault, out, err);
    if (synth->parsed()) return cmd_synth(config, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitBadInput;
}

}  // namespace sact::cli
