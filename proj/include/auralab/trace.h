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


// Replay traces and head trajectories. A trace uses the telemetry JSONL
// schema, so a recorded session replays as-is.

#ifndef AURALAB_TRACE_H_
#define AURALAB_TRACE_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "auralab/engine.h"
#include "auralab/osc.h"
#include "auralab/telemetry.h"

namespace auralab {

class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& detail)
      : std::runtime_error("MalformedTrace: " + detail), detail_(detail) {}
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
};

// The datagrams one trace event turns into, sent back to back.
struct TraceStep {
  int64_t t = 0;  // ms, as recorded
  std::vector<OscMessage> messages;
};

// pose -> /head/position + /head/rotation; teleport -> /seat (a teleport
// without an origin is the server's starting seat and is skipped); ui
// events -> /ui/*; session and end records are skipped.
std::vector<TraceStep> TraceSteps(const std::vector<TelemetryEvent>& events);

// Reads and converts a trace; throws TraceError with the line number.
std::vector<TraceStep> LoadTrace(const std::filesystem::path& path);

// Send offsets in ms from replay start: recorded times relative to the first
// step, or i * 1000 / rate_hz when rate_hz > 0.
std::vector<double> ReplayOffsets(const std::vector<TraceStep>& steps,
                                  double rate_hz);

struct JitterStats {
  size_t count = 0;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

// lateness[i] = actual - scheduled send time, in ms.
JitterStats ComputeJitter(std::vector<double> lateness_ms);

// CSV "time_s,w,x,y,z" (header optional) or telemetry JSONL, whose pose
// rows contribute (t / 1000, orientation). Times must not decrease.
std::vector<TrajectoryPoint> LoadTrajectory(const std::filesystem::path& path);

}  // namespace auralab

#endif  // AURALAB_TRACE_H_
