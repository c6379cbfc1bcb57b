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


#include "auralab/telemetry.h"

#include <algorithm>

#include "json.hpp"

namespace auralab {
namespace {

using nlohmann::json;

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view ToString(UiEventKind kind) {
  switch (kind) {
    case UiEventKind::kPlay: return "play";
    case UiEventKind::kStop: return "stop";
    case UiEventKind::kRating: return "rating";
    case UiEventKind::kInfo: return "info";
    case UiEventKind::kTrialAdvance: return "trial_advance";
    case UiEventKind::kSourceSelect: return "source_select";
  }
  return "unknown";
}

std::optional<UiEventKind> ParseUiEventKind(std::string_view text) {
  for (auto k : {UiEventKind::kPlay, UiEventKind::kStop, UiEventKind::kRating,
                 UiEventKind::kInfo, UiEventKind::kTrialAdvance,
                 UiEventKind::kSourceSelect}) {
    if (ToString(k) == text) return k;
  }
  return std::nullopt;
}

int64_t EventTime(const TelemetryEvent& event) {
  return std::visit([](const auto& e) { return e.t; }, event);
}

void SetEventTime(TelemetryEvent& event, int64_t t) {
  std::visit([t](auto& e) { e.t = t; }, event);
}

std::string TelemetryToJson(const TelemetryEvent& event) {
  json j = std::visit(
      Overloaded{
          [](const SessionStart& e) {
            return json{{"type", "session"}, {"t", e.t},
                        {"assessor", e.assessor}, {"session", e.session},
                        {"unix_ms", e.unix_ms}};
          },
          [](const PoseSample& e) {
            return json{{"type", "pose"}, {"t", e.t},
                        {"position", e.position},
                        {"orientation", e.orientation}};
          },
          [](const TeleportEvent& e) {
            json from = e.from_seat ? json(*e.from_seat) : json(nullptr);
            return json{{"type", "teleport"}, {"t", e.t}, {"from", from},
                        {"to", e.to_seat}};
          },
          [](const UiEvent& e) {
            return json{{"type", "ui"}, {"t", e.t},
                        {"kind", std::string(ToString(e.kind))},
                        {"payload", e.payload}};
          },
          [](const SessionEnd& e) { return json{{"type", "end"}, {"t", e.t}}; },
      },
      event);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

TelemetryEvent TelemetryFromJson(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw TelemetryError(std::string("not JSON: ") + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    const int64_t t = j.at("t").get<int64_t>();
    if (type == "session") {
      return SessionStart{t, j.value("assessor", ""), j.value("session", ""),
                          j.value("unix_ms", int64_t(0))};
    }
    if (type == "pose") {
      PoseSample p;
      p.t = t;
      p.position = j.at("position").get<std::array<double, 3>>();
      p.orientation = j.at("orientation").get<std::array<double, 4>>();
      return p;
    }
    if (type == "teleport") {
      TeleportEvent e;
      e.t = t;
      if (j.contains("from") && !j.at("from").is_null()) {
        e.from_seat = j.at("from").get<std::string>();
      }
      e.to_seat = j.at("to").get<std::string>();
      return e;
    }
    if (type == "ui") {
      const std::string kind = j.at("kind").get<std::string>();
      const auto k = ParseUiEventKind(kind);
      if (!k) throw TelemetryError("unknown ui kind '" + kind + "'");
      return UiEvent{t, *k, j.value("payload", "")};
    }
    if (type == "end") return SessionEnd{t};
    throw TelemetryError("unknown event type '" + type + "'");
  } catch (const json::exception& e) {
    throw TelemetryError(std::string("bad event: ") + e.what());
  }
}

std::vector<TelemetryEvent> ReadTelemetry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TelemetryError("cannot read " + path.string());
  std::vector<TelemetryEvent> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TelemetryFromJson(line));
    } catch (const TelemetryError& e) {
      throw TelemetryError(path.string() + ":" + std::to_string(line_no) +
                           ": " + e.what());
    }
  }
  return out;
}

std::string TelemetryFileName(const std::string& assessor,
                              const std::string& session) {
  return "telemetry_" + assessor + "_" + session + ".jsonl";
}

TelemetryLog::TelemetryLog(const std::filesystem::path& path,
                           TelemetryOptions options)
    : path_(path), options_(options) {
  if (options_.pose_decimation < 1) options_.pose_decimation = 1;
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) degraded_ = true;
  writer_ = std::thread([this] { Run(); });
}

TelemetryLog::~TelemetryLog() { Close(); }

void TelemetryLog::Record(TelemetryEvent event) {
  std::lock_guard<std::mutex> lock(mu_);
  if (closing_) {
    ++dropped_;
    return;
  }
  if (std::holds_alternative<PoseSample>(event) &&
      pose_counter_++ % uint64_t(options_.pose_decimation) != 0) {
    ++decimated_;
    return;
  }
  if (queue_.size() >= options_.queue_capacity) {
    ++dropped_;
    return;
  }
  const int64_t t = EventTime(event);
  if (t < last_t_) {
    SetEventTime(event, last_t_);
    ++clamped_;
  } else {
    last_t_ = t;
  }
  queue_.push_back(std::move(event));
  if (queue_.size() >= options_.queue_capacity / 2) cv_.notify_one();
}

void TelemetryLog::Flush() {
  std::unique_lock<std::mutex> lock(mu_);
  if (closed_) return;
  const uint64_t ticket = ++flush_requests_;
  cv_.notify_one();
  flushed_cv_.wait(lock, [&] { return flushes_done_ >= ticket || closed_; });
}

void TelemetryLog::Close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closing_ = true;
    cv_.notify_one();
  }
  if (writer_.joinable()) writer_.join();
}

void TelemetryLog::WriteBatch(std::deque<TelemetryEvent>& batch) {
  for (const auto& e : batch) {
    if (!degraded_) {
      out_ << TelemetryToJson(e) << '\n';
      if (!out_) {
        degraded_ = true;
        continue;
      }
      ++written_;
    }
  }
  batch.clear();
  if (!degraded_) {
    out_.flush();
    if (!out_) degraded_ = true;
  }
}

void TelemetryLog::Run() {
  std::deque<TelemetryEvent> batch;
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    cv_.wait_for(lock, options_.flush_interval, [&] {
      return closing_ || flush_requests_ > flushes_done_ ||
             queue_.size() >= options_.queue_capacity / 2;
    });
    batch.swap(queue_);
    const uint64_t requests = flush_requests_;
    const bool closing = closing_;
    lock.unlock();
    WriteBatch(batch);
    lock.lock();
    flushes_done_ = requests;
    if (closing && queue_.empty()) {
      closed_ = true;
      flushed_cv_.notify_all();
      break;
    }
    flushed_cv_.notify_all();
  }
  lock.unlock();
  out_.close();
}

std::map<std::string, SeatDwell> ComputeDwell(
    const std::vector<TeleportEvent>& teleports, int64_t session_end) {
  std::map<std::string, SeatDwell> out;
  for (size_t i = 0; i < teleports.size(); ++i) {
    const int64_t arrive = teleports[i].t;
    const int64_t leave = i + 1 < teleports.size() ? teleports[i + 1].t : session_end;
    if (leave < arrive) {
      throw TelemetryError("UnorderedInput: teleport " + std::to_string(i) +
                           " at " + std::to_string(arrive) +
                           " ms is followed by t=" + std::to_string(leave));
    }
    auto& cell = out[teleports[i].to_seat];
    cell.dwell_ms += leave - arrive;
    ++cell.visits;
  }
  return out;
}

std::map<std::string, SeatDwell> ComputeDwell(
    const std::vector<TelemetryEvent>& log) {
  std::vector<TeleportEvent> teleports;
  std::optional<int64_t> end;
  int64_t last = 0;
  for (const auto& e : log) {
    last = std::max(last, EventTime(e));
    if (const auto* t = std::get_if<TeleportEvent>(&e)) teleports.push_back(*t);
    if (const auto* s = std::get_if<SessionEnd>(&e)) end = s->t;
  }
  return ComputeDwell(teleports, end.value_or(last));
}

}  // namespace auralab
