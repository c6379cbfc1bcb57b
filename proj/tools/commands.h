// Copyright 2026 The Auralab Authors
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


// Subcommands of the auralab tool. Each Add* registers its options on the
// app and, when selected, stores the action to run after parsing.

#ifndef AURALAB_TOOLS_COMMANDS_H_
#define AURALAB_TOOLS_COMMANDS_H_

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "auralab/config.h"

namespace auralab::cli {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

using Action = std::function<int()>;

// Bad invocation or configuration; exits with kExitConfig.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --config, falling back to $AURALAB_CONFIG. Empty when neither is set.
std::filesystem::path ConfigPath(const std::string& flag);
// Loads the config named by the flag or environment; throws UsageError when
// none is given and `required`.
std::optional<ServerConfig> LoadConfig(const std::string& flag, bool required);

void AddServe(CLI::App& app, Action& action);
void AddRender(CLI::App& app, Action& action);
void AddAnalyze(CLI::App& app, Action& action);
void AddSimulateClient(CLI::App& app, Action& action);

}  // namespace auralab::cli

#endif  // AURALAB_TOOLS_COMMANDS_H_
