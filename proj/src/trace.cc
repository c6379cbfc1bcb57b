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


#include "auralab/trace.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace auralab {
namespace {

namespace a = osc_address;

OscMessage Msg(std::string_view address, std::vector<OscArg> args = {}) {
  return OscMessage{std::string(address), std::move(args)};
}

std::vector<OscMessage> UiMessages(const UiEvent& e) {
  switch (e.kind) {
    case UiEventKind::kPlay:
      return {Msg(a::kUiPlay, {e.payload})};
    case UiEventKind::kStop:
      return {Msg(a::kUiStop)};
    case UiEventKind::kInfo:
      return {Msg(a::kUiInfo, {e.payload})};
    case UiEventKind::kTrialAdvance:
      return {Msg(a::kUiTrialNext)};
    case UiEventKind::kSourceSelect:
      return {Msg(a::kUiSource, {e.payload})};
    case UiEventKind::kRating: {
      std::istringstream is(e.payload);
      std::string attribute, label, value, extra;
      is >> attribute >> label >> value;
      int32_t v = 0;
      const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (attribute.empty() || label.empty() || ec != std::errc() ||
          end != value.data() + value.size() || (is >> extra)) {
        throw TraceError("rating payload '" + e.payload +
                         "' is not '<attribute> <label> <value>'");
      }
      return {Msg(a::kUiRating, {attribute, label, v})};
    }
  }
  return {};
}

}  // namespace

std::vector<TraceStep> TraceSteps(const std::vector<TelemetryEvent>& events) {
  std::vector<TraceStep> steps;
  for (const auto& event : events) {
    TraceStep step{EventTime(event), {}};
    if (const auto* p = std::get_if<PoseSample>(&event)) {
      step.messages.push_back(Msg(a::kHeadPosition, {float(p->position[0]),
                                                     float(p->position[1]),
                                                     float(p->position[2])}));
      step.messages.push_back(
          Msg(a::kHeadRotation, {float(p->orientation[0]), float(p->orientation[1]),
                                 float(p->orientation[2]), float(p->orientation[3])}));
    } else if (const auto* t = std::get_if<TeleportEvent>(&event)) {
      if (!t->from_seat) continue;
      step.messages.push_back(Msg(a::kSeat, {t->to_seat}));
    } else if (const auto* u = std::get_if<UiEvent>(&event)) {
      step.messages = UiMessages(*u);
    } else {
      continue;
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<TraceStep> LoadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot read " + path.string());
  std::vector<TraceStep> steps;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(number) + ": ";
    try {
      for (auto& step : TraceSteps({TelemetryFromJson(line)})) {
        steps.push_back(std::move(step));
      }
    } catch (const TraceError& e) {
      throw TraceError(where + e.detail());
    } catch (const std::exception& e) {
      throw TraceError(where + e.what());
    }
  }
  return steps;
}

std::vector<double> ReplayOffsets(const std::vector<TraceStep>& steps, double rate_hz) {
  std::vector<double> offsets(steps.size());
  for (size_t i = 0; i < steps.size(); ++i) {
    offsets[i] = rate_hz > 0.0 ? double(i) * 1000.0 / rate_hz
                               : double(steps[i].t - steps.front().t);
    if (i > 0 && offsets[i] < offsets[i - 1]) {
      throw TraceError("event " + std::to_string(i) + " precedes its predecessor");
    }
  }
  return offsets;
}

JitterStats ComputeJitter(std::vector<double> lateness) {
  JitterStats s;
  s.count = lateness.size();
  if (lateness.empty()) return s;
  std::sort(lateness.begin(), lateness.end());
  s.mean_ms = std::accumulate(lateness.begin(), lateness.end(), 0.0) / double(s.count);
  s.max_ms = lateness.back();
  s.p95_ms = lateness[std::min(s.count - 1, size_t(std::ceil(0.95 * double(s.count))) - 1)];
  return s;
}

std::vector<TrajectoryPoint> LoadTrajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot read " + path.string());
  std::vector<TrajectoryPoint> points;
  std::string line;
  int number = 0;
  auto fail = [&](const std::string& what) {
    throw TraceError(path.string() + ":" + std::to_string(number) + ": " + what);
  };
  auto add = [&](double t, double w, double x, double y, double z) {
    const auto q = Orientation::FromQuaternion(w, x, y, z);
    if (!q || !std::isfinite(t)) fail("invalid orientation");
    if (!points.empty() && t < points.back().time_s) fail("time goes backwards");
    points.push_back({t, *q});
  };
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '{') {
      TelemetryEvent event;
      try {
        event = TelemetryFromJson(line);
      } catch (const std::exception& e) {
        fail(e.what());
      }
      if (const auto* p = std::get_if<PoseSample>(&event)) {
        add(double(p->t) / 1000.0, p->orientation[0], p->orientation[1],
            p->orientation[2], p->orientation[3]);
      }
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    double t, w, x, y, z;
    if (!(is >> t >> w >> x >> y >> z)) {
      if (points.empty() && line.find("time") != std::string::npos) continue;
      fail("expected time_s,w,x,y,z");
    }
    add(t, w, x, y, z);
  }
  return points;
}

}  // namespace auralab
