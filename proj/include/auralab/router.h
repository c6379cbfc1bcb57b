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


// Routes decoded client messages to the session, the engine and the
// telemetry log. All entry points are serialized by one mutex, so the UDP
// receive thread and WebSocket sessions may call them concurrently.

#ifndef AURALAB_ROUTER_H_
#define AURALAB_ROUTER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "auralab/engine.h"
#include "auralab/osc.h"
#include "auralab/session.h"
#include "auralab/telemetry.h"
#include "auralab/udp.h"

namespace auralab {

enum class RouteStatus { kOk, kIgnored, kRejected };

struct RouteResult {
  RouteStatus status = RouteStatus::kOk;
  std::string detail;
  std::vector<RatingCell> missing;  // for an incomplete trial
};

// Label-only snapshot of what a client may show.
struct UiView {
  SessionPhase phase = SessionPhase::kFamiliarization;
  int trial = 0;  // 1-based; 0 during familiarization
  int trial_count = 0;
  std::optional<AttributeId> attribute;
  std::vector<std::string> labels;
  // attribute key -> label -> value, current trial only
  std::map<std::string, std::map<std::string, int>> ratings;
  std::string active_label;
  std::string seat;
  Transport transport = Transport::kStopped;
  std::string source;
  std::vector<std::string> available_sources;
  bool finalized = false;
};

struct RouterOptions {
  std::filesystem::path results_dir = ".";
  std::string telemetry_file;
};

struct RouterStats {
  uint64_t routed = 0;
  uint64_t ignored = 0;
  uint64_t rejected = 0;
};

// Value of /state/trial once every trial is complete.
inline constexpr int32_t kTrialStateDone = -1;

class Router {
 public:
  using Clock = std::function<int64_t()>;  // ms since session start
  using Logger = std::function<void(const std::string&)>;

  // samples: id -> sample. A trial entry "a+b" plays a on source 0 and b on
  // source 1. telemetry and notifier may be null.
  Router(Session& session, Engine& engine,
         const std::map<std::string, SourceSample>& samples,
         TelemetryLog* telemetry, UdpSender* notifier, RouterOptions options,
         Clock clock, Logger logger = nullptr);

  // Logs the session header and the starting seat, loads trial 0's sample.
  void Start();
  RouteResult Dispatch(const OscMessage& message);
  UiView View() const;
  // Writes the end record and the results (aborted unless every trial is
  // complete). Idempotent.
  void Shutdown();

  // Called after every dispatched message, outside the lock.
  void AddObserver(std::function<void()> observer);

  RouterStats stats() const;

 private:
  RouteResult Route(const OscMessage& m, int64_t t);
  RouteResult OnSeat(const std::string& label, int64_t t);
  RouteResult OnPlay(const std::string& label, int64_t t);
  RouteResult OnTrialNext(int64_t t);
  bool LoadSources(const std::string& spec);
  void Record(TelemetryEvent event);
  void Notify(const OscMessage& m);
  void NotifyTrial();
  void Log(const std::string& line);

  Session& session_;
  Engine& engine_;
  const std::map<std::string, SourceSample>& samples_;
  TelemetryLog* telemetry_;
  UdpSender* notifier_;
  RouterOptions options_;
  Clock clock_;
  Logger logger_;

  mutable std::mutex mu_;
  std::vector<std::function<void()>> observers_;
  RouterStats stats_;
  std::string seat_;
  std::string active_label_;
  std::string source_;
  std::array<double, 3> position_{};
  bool started_ = false;
  bool shut_down_ = false;
};

}  // namespace auralab

#endif  // AURALAB_ROUTER_H_
