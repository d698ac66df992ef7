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
#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace sact::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitRuntime = 3;

struct TranslateArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  bool trace = false;
  // When true the model section of the config must match the checkpoint.
  bool config_given = false;
};

int cmd_train(const RunConfig& config, bool resume, std::ostream& out, std::ostream& err);
int cmd_translate(const RunConfig& config, const TranslateArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& hyp, const std::filesystem::path& ref, std::size_t max_n,
             std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const RunConfig& config, const std::string& fault_group, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv, dispatches, and maps exceptions onto exit statuses.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sact::cli
