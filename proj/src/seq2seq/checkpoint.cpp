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

#include "sact/seq2seq/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string_view>

#include "sact/errors.hpp"

namespace sact::seq2seq {

namespace {

constexpr std::string_view kMagic = "SACTCKP1";

using nlohmann::json;

std::string mode_name(attention::TemperatureMode m) {
  switch (m) {
    case attention::TemperatureMode::adaptive: return "adaptive";
    case attention::TemperatureMode::fixed: return "fixed";
    case attention::TemperatureMode::conventional: return "conventional";
  }
  return "adaptive";
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_tensor(std::string& out, const Tensor& t) {
  for (double d : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

json shape_json(const Tensor& t) {
  json s = json::array();
  for (std::size_t d : t.shape().dims()) s.push_back(d);
  return s;
}

}  // namespace

json config_to_json(const ModelConfig& c) {
  return {{"src_vocab_size", c.src_vocab_size},
          {"tgt_vocab_size", c.tgt_vocab_size},
          {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"lambda", c.lambda},
          {"dropout", c.dropout_rate},
          {"max_decode_factor", c.max_decode_factor},
          {"max_decode_offset", c.max_decode_offset},
          {"score", "bilinear"},
          {"attention", mode_name(c.temperature.mode)},
          {"fixed_tau", c.temperature.fixed_tau}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  try {
    c.src_vocab_size = j.at("src_vocab_size").get<std::size_t>();
    c.tgt_vocab_size = j.at("tgt_vocab_size").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.lambda = j.at("lambda").get<double>();
    c.dropout_rate = j.at("dropout").get<double>();
    c.max_decode_factor = j.at("max_decode_factor").get<std::size_t>();
    c.max_decode_offset = j.at("max_decode_offset").get<std::size_t>();
    if (j.at("score").get<std::string>() != "bilinear") throw ConfigError("checkpoint: unknown score kind");
    const std::string mode = j.at("attention").get<std::string>();
    if (mode == "adaptive")
      c.temperature.mode = attention::TemperatureMode::adaptive;
    else if (mode == "fixed")
      c.temperature.mode = attention::TemperatureMode::fixed;
    else if (mode == "conventional")
      c.temperature.mode = attention::TemperatureMode::conventional;
    else
      throw ConfigError("checkpoint: unknown attention mode '" + mode + "'");
    c.temperature.fixed_tau = j.at("fixed_tau").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint config: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, ModelParams& params,
                     const std::map<std::string, const Tensor*>& extra, const json& meta) {
  json manifest = json::array();
  std::string body;
  std::size_t offset = 0;
  auto add = [&](const std::string& name, const Tensor& t) {
    manifest.push_back({{"name", name}, {"shape", shape_json(t)}, {"dtype", "float64"},
                        {"offset", offset}, {"count", t.size()}});
    put_tensor(body, t);
    offset += t.size();
  };
  for (const auto& [name, t] : params.named()) add(name, *t);
  for (const auto& [name, t] : extra) add(name, *t);

  const json header = {{"format_version", kCheckpointVersion},
                       {"config", config_to_json(config)},
                       {"tensors", manifest},
                       {"meta", meta}};
  const std::string text = header.dump();
  std::string out(kMagic);
  put_u64(out, text.size());
  out += text;
  out += body;

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write checkpoint " + tmp.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write on checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 16 || std::string_view(raw).substr(0, 8) != kMagic)
    throw IoError(path.string() + " is not a checkpoint");
  const std::uint64_t hlen = get_u64(raw.data() + 8);
  if (hlen > raw.size() - 16) throw IoError(path.string() + ": truncated header");
  json header;
  try {
    header = json::parse(raw.substr(16, hlen));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": bad header: " + e.what());
  }
  if (header.value("format_version", 0) != kCheckpointVersion)
    throw IoError(path.string() + ": unsupported format version");

  Checkpoint ck;
  ck.config = config_from_json(header.at("config"));
  ck.config.validate();
  ck.params = ModelParams::zeros(ck.config);
  ck.meta = header.value("meta", json::object());
  const char* buf = raw.data() + 16 + hlen;
  const std::size_t available = (raw.size() - 16 - hlen) / 8;

  std::map<std::string, Tensor*> slots;
  for (auto& [name, t] : ck.params.named()) slots[name] = t;
  std::size_t seen = 0;
  for (const json& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    std::vector<std::size_t> dims = entry.at("shape").get<std::vector<std::size_t>>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t count = entry.at("count").get<std::size_t>();
    if (entry.value("dtype", "") != "float64") throw IoError(path.string() + ": " + name + " is not float64");
    if (offset + count > available) throw IoError(path.string() + ": truncated buffer for " + name);
    const Shape shape(dims);
    if (shape.numel() != count) throw IoError(path.string() + ": manifest count mismatch for " + name);
    Tensor t(shape);
    for (std::size_t i = 0; i < count; ++i) t[i] = std::bit_cast<double>(get_u64(buf + 8 * (offset + i)));
    if (auto it = slots.find(name); it != slots.end()) {
      if (!(it->second->shape() == shape))
        throw ShapeError("checkpoint tensor " + name + " has shape " + shape.str() + ", config implies " +
                         it->second->shape().str());
      *it->second = std::move(t);
      ++seen;
    } else {
      ck.extra.emplace(name, std::move(t));
    }
  }
  if (seen != slots.size()) throw IoError(path.string() + ": missing model parameters");
  ck.params.ctrl.lambda = ck.config.lambda;
  ck.params.attn.kind = ck.config.score_kind;
  return ck;
}

}  // namespace sact::seq2seq
