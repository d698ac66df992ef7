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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sact/seq2seq/model.hpp"

/// Checkpoint container.
///
///     bytes 0..7    magic "SACTCKP1"
///     bytes 8..15   header length L, uint64 little-endian
///     next L bytes  UTF-8 JSON header
///     remainder     float64 little-endian buffers, back to back
///
/// The header holds "format_version", "config" (the ModelConfig), "tensors"
/// (the manifest: name, shape, dtype "float64", element offset and count, in
/// buffer order) and "meta" (free-form, e.g. the optimizer step). Model
/// parameters come first in ModelParams::named() order, followed by any extra
/// tensors such as optimizer moments.
namespace sact::seq2seq {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json config_to_json(const ModelConfig& config);
// Throws ConfigError on a missing or malformed field.
ModelConfig config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::map<std::string, Tensor> extra;
  nlohmann::json meta = nlohmann::json::object();
};

// Writes to a temporary file and renames it over `path`.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, ModelParams& params,
                     const std::map<std::string, const Tensor*>& extra = {},
                     const nlohmann::json& meta = nlohmann::json::object());

// Throws IoError on unreadable or truncated files and ShapeError naming the
// tensor when a buffer does not match the shape implied by the config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sact::seq2seq
