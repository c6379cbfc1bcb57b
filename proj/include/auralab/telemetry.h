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


// Behavioral telemetry: pose samples, teleports and UI events written as
// JSON Lines by a background writer, plus per-seat dwell accumulation.
//
// One event per line, each with a "type" field:
//
//   {"type":"session","t":0,"assessor":"a01","session":"s1","unix_ms":...}
//   {"type":"pose","t":14,"position":[0.1,1.2,1.6],"orientation":[1,0,0,0]}
//   {"type":"teleport","t":20,"from":"A1","to":"B3"}
//   {"type":"ui","t":31,"kind":"play","payload":"C"}
//   {"type":"end","t":60000}
//
// t is milliseconds since session start.

#ifndef AURALAB_TELEMETRY_H_
#define AURALAB_TELEMETRY_H_

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

namespace auralab {

struct PoseSample {
  int64_t t = 0;
  std::array<double, 3> position{};
  std::array<double, 4> orientation{1.0, 0.0, 0.0, 0.0};  // w, x, y, z
  bool operator==(const PoseSample&) const = default;
};

struct TeleportEvent {
  int64_t t = 0;
  std::optional<std::string> from_seat;
  std::string to_seat;
  bool operator==(const TeleportEvent&) const = default;
};

enum class UiEventKind { kPlay, kStop, kRating, kInfo, kTrialAdvance, kSourceSelect };

std::string_view ToString(UiEventKind kind);
std::optional<UiEventKind> ParseUiEventKind(std::string_view text);

// Payloads: play = stimulus label; stop = ""; rating = "<attribute> <label>
// <value>"; info = attribute id; trial_advance = new 1-based trial index (or
// "done"); source_select = source-sample id.
struct UiEvent {
  int64_t t = 0;
  UiEventKind kind = UiEventKind::kPlay;
  std::string payload;
  bool operator==(const UiEvent&) const = default;
};

struct SessionStart {
  int64_t t = 0;
  std::string assessor;
  std::string session;
  int64_t unix_ms = 0;
  bool operator==(const SessionStart&) const = default;
};

struct SessionEnd {
  int64_t t = 0;
  bool operator==(const SessionEnd&) const = default;
};

using TelemetryEvent =
    std::variant<SessionStart, PoseSample, TeleportEvent, UiEvent, SessionEnd>;

int64_t EventTime(const TelemetryEvent& event);
void SetEventTime(TelemetryEvent& event, int64_t t);

class TelemetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string TelemetryToJson(const TelemetryEvent& event);
// Throws TelemetryError naming the problem.
TelemetryEvent TelemetryFromJson(std::string_view line);
// Blank lines are skipped; throws TelemetryError with the line number.
std::vector<TelemetryEvent> ReadTelemetry(const std::filesystem::path& path);

std::string TelemetryFileName(const std::string& assessor,
                              const std::string& session);

struct TelemetryOptions {
  size_t queue_capacity = 65536;
  std::chrono::milliseconds flush_interval{250};
  // Keep every n-th pose sample; 1 keeps all.
  int pose_decimation = 1;
};

class TelemetryLog {
 public:
  // Opens (truncates) the file and starts the writer thread. An unopenable
  // file puts the log in the degraded state instead of throwing.
  explicit TelemetryLog(const std::filesystem::path& path,
                        TelemetryOptions options = {});
  ~TelemetryLog();
  TelemetryLog(const TelemetryLog&) = delete;
  TelemetryLog& operator=(const TelemetryLog&) = delete;

  // Never blocks on I/O; drops (and counts) when the queue is full.
  void Record(TelemetryEvent event);
  // Drains the queue and flushes to disk.
  void Flush();
  // Flushes and stops the writer. Idempotent; Record after Close is dropped.
  void Close();

  const std::filesystem::path& path() const { return path_; }
  uint64_t written() const { return written_.load(); }
  uint64_t dropped() const { return dropped_.load(); }
  uint64_t clamped() const { return clamped_.load(); }
  uint64_t decimated() const { return decimated_.load(); }
  bool degraded() const { return degraded_.load(); }

 private:
  void Run();
  void WriteBatch(std::deque<TelemetryEvent>& batch);

  std::filesystem::path path_;
  TelemetryOptions options_;
  std::ofstream out_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable flushed_cv_;
  std::deque<TelemetryEvent> queue_;
  bool closing_ = false;
  bool closed_ = false;
  uint64_t flush_requests_ = 0;
  uint64_t flushes_done_ = 0;
  uint64_t pose_counter_ = 0;
  int64_t last_t_ = 0;
  std::thread writer_;
  std::atomic<uint64_t> written_{0};
  std::atomic<uint64_t> dropped_{0};
  std::atomic<uint64_t> clamped_{0};
  std::atomic<uint64_t> decimated_{0};
  std::atomic<bool> degraded_{false};
};

struct SeatDwell {
  int64_t dwell_ms = 0;
  int visits = 0;
  bool operator==(const SeatDwell&) const = default;
};

// Throws TelemetryError("UnorderedInput ...") if teleports are not
// time-ordered or session_end precedes the last teleport.
std::map<std::string, SeatDwell> ComputeDwell(
    const std::vector<TeleportEvent>& teleports, int64_t session_end);

// Teleports and end time extracted from a log; end defaults to the last
// event time when the log has no "end" record.
std::map<std::string, SeatDwell> ComputeDwell(
    const std::vector<TelemetryEvent>& log);

}  // namespace auralab

#endif  // AURALAB_TELEMETRY_H_
