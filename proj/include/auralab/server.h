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


// The live evaluation server: dataset, engine, session, OSC endpoint,
// browser bridge and a real-time paced audio sink, wired together.

#ifndef AURALAB_SERVER_H_
#define AURALAB_SERVER_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "auralab/arir_store.h"
#include "auralab/audio_block.h"
#include "auralab/binaural.h"
#include "auralab/config.h"
#include "auralab/engine.h"
#include "auralab/router.h"
#include "auralab/session.h"
#include "auralab/telemetry.h"
#include "auralab/udp.h"
#include "auralab/wav.h"
#include "auralab/web_bridge.h"

namespace auralab {

// what() reads "[<module>] <message>".
class StartupError : public std::runtime_error {
 public:
  StartupError(std::string module, const std::string& message, bool config_error)
      : std::runtime_error("[" + module + "] " + message),
        module_(std::move(module)),
        config_error_(config_error) {}
  const std::string& module() const { return module_; }
  // Bad configuration or dataset, as opposed to a runtime resource failure.
  bool config_error() const { return config_error_; }

 private:
  std::string module_;
  bool config_error_;
};

struct MonitorStats {
  uint64_t blocks = 0;
  uint64_t playing_blocks = 0;
  uint64_t nonfinite_samples = 0;
  uint64_t discontinuities = 0;
  uint64_t late_blocks = 0;
  double max_step = 0.0;
  double peak = 0.0;
};

// Watches rendered output for dropouts: non-finite samples, sample-to-sample
// steps above the limit while programme audio plays, and blocks delivered
// after their deadline. Observe is called from the audio thread only.
class OutputMonitor {
 public:
  explicit OutputMonitor(double step_limit = 1.0) : step_limit_(step_limit) {}

  void Observe(const AudioBlock& block, bool playing);
  void ObserveLate() { late_blocks_.fetch_add(1, std::memory_order_relaxed); }
  MonitorStats stats() const;
  double step_limit() const { return step_limit_; }

 private:
  double step_limit_;
  double last_[2] = {0.0, 0.0};
  bool last_playing_ = false;
  std::atomic<uint64_t> blocks_{0};
  std::atomic<uint64_t> playing_blocks_{0};
  std::atomic<uint64_t> nonfinite_{0};
  std::atomic<uint64_t> discontinuities_{0};
  std::atomic<uint64_t> late_blocks_{0};
  std::atomic<double> max_step_{0.0};
  std::atomic<double> peak_{0.0};
};

struct ServerOptions {
  // Limit for OutputMonitor; defaults to full scale.
  double step_limit = 1.0;
  std::function<void(const std::string&)> logger;
};

class Server {
 public:
  // Loads and validates every resource named by the config without touching
  // the network or audio. Throws StartupError.
  explicit Server(ServerConfig config, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Opens telemetry, the OSC endpoint, the notification sender, the browser
  // bridge and the audio sink. Throws StartupError.
  void Start();
  // Finalizes the session (aborted unless complete), flushes telemetry and
  // stops every thread. Idempotent.
  void Stop();

  // True once the last trial has been completed and the results written.
  bool finished() const;
  std::string ReadyLine() const;
  // One line per check for `serve --check`.
  std::string Summary() const;

  uint16_t osc_port() const;
  uint16_t ws_port() const;
  const ServerConfig& config() const { return config_; }
  const ArirSet& arirs() const { return *arirs_; }
  Engine& engine() { return *engine_; }
  Router& router() { return *router_; }
  const UdpEndpoint* endpoint() const { return endpoint_.get(); }
  MonitorStats monitor() const { return monitor_.stats(); }
  std::filesystem::path telemetry_path() const;

 private:
  void AudioLoop();
  void Log(const std::string& line) const;

  ServerConfig config_;
  ServerOptions options_;
  std::unique_ptr<ArirSet> arirs_;
  BinauralDecoder decoder_;
  std::map<std::string, SourceSample> samples_;
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<Session> session_;

  std::unique_ptr<TelemetryLog> telemetry_;
  std::unique_ptr<UdpSender> notifier_;
  std::unique_ptr<Router> router_;
  std::unique_ptr<UdpEndpoint> endpoint_;
  std::unique_ptr<WebBridge> bridge_;
  std::unique_ptr<WavStreamWriter> wav_;
  OutputMonitor monitor_;
  std::atomic<bool> audio_running_{false};
  std::thread audio_thread_;
  bool started_ = false;
  bool stopped_ = false;
};

}  // namespace auralab

#endif  // AURALAB_SERVER_H_
