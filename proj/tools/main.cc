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


#include <cstdio>
#include <iostream>

#include "auralab/osc.h"
#include "auralab/server.h"
#include "auralab/trace.h"
#include "commands.h"

namespace auralab::cli {

std::filesystem::path ConfigPath(const std::string& flag) {
  if (!flag.empty()) return flag;
  return ConfigPathFromEnvironment();
}

std::optional<ServerConfig> LoadConfig(const std::string& flag, bool required) {
  const auto path = ConfigPath(flag);
  if (path.empty()) {
    if (required) throw UsageError("no config: pass --config or set AURALAB_CONFIG");
    return std::nullopt;
  }
  return LoadServerConfig(path);
}

}  // namespace auralab::cli

int main(int argc, char** argv) {
  using namespace auralab;
  using namespace auralab::cli;

  CLI::App app{"auralab: spatial-audio listening test server and tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "auralab 0.1.0");
  Action action;
  AddServe(app, action);
  AddRender(app, action);
  AddAnalyze(app, action);
  AddSimulateClient(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: [config] " << e.what() << '\n';
    return kExitConfig;
  } catch (const StartupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.config_error() ? kExitConfig : kExitRuntime;
  } catch (const ArirError& e) {
    std::cerr << "error: [arir_store] " << e.what() << '\n';
    return kExitConfig;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
