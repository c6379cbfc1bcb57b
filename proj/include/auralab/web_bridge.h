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


// Browser bridge: one HTTP listener that serves the static UI and upgrades
// "/ws" to a WebSocket carrying the JSON mirror of the OSC protocol.

#ifndef AURALAB_WEB_BRIDGE_H_
#define AURALAB_WEB_BRIDGE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "auralab/osc.h"
#include "auralab/router.h"

namespace auralab {

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"type":"seat","id":"B3"} -> /seat "B3", and so on for every client
// address. Throws BridgeError naming the problem.
OscMessage TranslateClientJson(std::string_view text);

// {"type":"state", ...}: phase, trial, labels, ratings, seat, transport.
std::string UiViewToJson(const UiView& view);
// {"type":"error","message":...,"missing":[{"attribute":..,"label":..}]}
std::string RouteErrorToJson(const RouteResult& result);

// Content type for a static file extension.
std::string_view MimeType(std::string_view path);
// Maps a request target to a file under root; nullopt for traversal
// attempts. "/" maps to index.html.
std::optional<std::filesystem::path> ResolveStatic(
    const std::filesystem::path& root, std::string_view target);

class WebBridge {
 public:
  // Binds host:port (0 = ephemeral) and starts serving. Throws BridgeError.
  WebBridge(Router& router, const std::string& host, uint16_t port,
            std::filesystem::path static_dir);
  ~WebBridge();
  WebBridge(const WebBridge&) = delete;
  WebBridge& operator=(const WebBridge&) = delete;

  uint16_t port() const;
  size_t clients() const;
  // Pushes the current state to every connected client.
  void Broadcast();
  void Stop();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace auralab

#endif  // AURALAB_WEB_BRIDGE_H_
