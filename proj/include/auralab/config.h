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


// The server configuration document (JSON). Relative paths resolve against
// the directory holding the file.
//
//   {
//     "dataset":   {"root": "data", "manifest": "data/manifest.json"},
//     "decoder":   "hrir/decoder.wav",
//     "sources":   [{"id": "castanets", "path": "audio/castanets.wav"}],
//     "audio":     {"sink": "null", "path": "", "block": 512},
//     "osc":       {"listen": "127.0.0.1", "port": 9000,
//                   "notify_host": "127.0.0.1", "notify_port": 9001},
//     "websocket": {"listen": "127.0.0.1", "port": 8080, "static_dir": "web"},
//     "session":   {"assessor": "a01", "session": "s1",
//                   "trials": ["castanets"], "seed": 1},
//     "output_dir": "out"
//   }

#ifndef AURALAB_CONFIG_H_
#define AURALAB_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "auralab/session.h"

namespace auralab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AudioSink { kNull, kWav };

struct SourceEntry {
  std::string id;
  std::filesystem::path path;
};

struct ServerConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path manifest;  // defaults to <root>/manifest.json
  std::filesystem::path decoder;
  std::vector<SourceEntry> sources;

  AudioSink sink = AudioSink::kNull;
  std::filesystem::path sink_path;  // kWav only
  size_t block = 512;

  std::string osc_listen = "127.0.0.1";
  uint16_t osc_port = 9000;
  std::string notify_host = "127.0.0.1";
  uint16_t notify_port = 9001;

  std::string ws_listen = "127.0.0.1";
  uint16_t ws_port = 8080;
  std::filesystem::path static_dir;  // empty: no static files

  SessionConfig session;
  int pose_decimation = 1;

  std::filesystem::path output_dir = ".";
};

// Throws ConfigError naming the offending key.
ServerConfig ParseServerConfig(std::string_view json_text,
                               const std::filesystem::path& base_dir);
ServerConfig LoadServerConfig(const std::filesystem::path& path);

// Path of the config named by $AURALAB_CONFIG, or empty.
std::filesystem::path ConfigPathFromEnvironment();

// Checks what parsing cannot: referenced files exist, ports are distinct,
// the session config is valid. Returns one message per problem.
std::vector<std::string> CheckServerConfig(const ServerConfig& config);

std::string_view ToString(AudioSink sink);

}  // namespace auralab

#endif  // AURALAB_CONFIG_H_
