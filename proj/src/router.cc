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


#include "auralab/router.h"

#include <sstream>

namespace auralab {
namespace {

const std::string& Str(const OscMessage& m, size_t i) {
  return std::get<std::string>(m.args[i]);
}
float Flt(const OscMessage& m, size_t i) { return std::get<float>(m.args[i]); }

RouteResult Ok() { return {}; }
RouteResult Rejected(std::string detail,
                     std::vector<RatingCell> missing = {}) {
  return {RouteStatus::kRejected, std::move(detail), std::move(missing)};
}

std::vector<std::string> SplitPlus(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, '+')) out.push_back(part);
  return out;
}

}  // namespace

Router::Router(Session& session, Engine& engine,
               const std::map<std::string, SourceSample>& samples,
               TelemetryLog* telemetry, UdpSender* notifier,
               RouterOptions options, Clock clock, Logger logger)
    : session_(session),
      engine_(engine),
      samples_(samples),
      telemetry_(telemetry),
      notifier_(notifier),
      options_(std::move(options)),
      clock_(std::move(clock)),
      logger_(std::move(logger)) {}

void Router::Log(const std::string& line) {
  if (logger_) logger_(line);
}

void Router::Record(TelemetryEvent event) {
  if (telemetry_ != nullptr) telemetry_->Record(std::move(event));
}

void Router::Notify(const OscMessage& m) {
  if (notifier_ != nullptr) notifier_->Send(m);
}

void Router::NotifyTrial() {
  int32_t trial = 0;
  if (session_.phase() == SessionPhase::kRating) trial = session_.trial_index() + 1;
  if (session_.phase() == SessionPhase::kDone) trial = kTrialStateDone;
  Notify({std::string(osc_address::kStateTrial), {trial}});
}

bool Router::LoadSources(const std::string& spec) {
  const auto ids = SplitPlus(spec);
  for (const auto& id : ids) {
    if (!samples_.count(id)) return false;
  }
  for (int k = 0; k < engine_.num_sources(); ++k) {
    engine_.SetSource(k, k < int(ids.size()) ? &samples_.at(ids[k]) : nullptr);
  }
  source_ = spec;
  return true;
}

void Router::Start() {
  std::lock_guard<std::mutex> lock(mu_);
  if (started_) return;
  started_ = true;
  const int64_t t = clock_();
  Record(SessionStart{t, session_.config().assessor_id,
                      session_.config().session_id, SystemUnixMs()});
  seat_ = engine_.state().seat;
  Record(TeleportEvent{t, std::nullopt, seat_});
  if (!LoadSources(session_.trial_source())) {
    Log("trial source '" + session_.trial_source() + "' is not loaded");
  }
  NotifyTrial();
  Notify({std::string(osc_address::kStateSeat), {seat_}});
  Notify({std::string(osc_address::kStateTransport), {std::string("stopped")}});
}

void Router::AddObserver(std::function<void()> observer) {
  std::lock_guard<std::mutex> lock(mu_);
  observers_.push_back(std::move(observer));
}

RouterStats Router::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

RouteResult Router::Dispatch(const OscMessage& message) {
  RouteResult result;
  std::vector<std::function<void()>> observers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (shut_down_) return {RouteStatus::kIgnored, "shut down", {}};
    result = Route(message, clock_());
    switch (result.status) {
      case RouteStatus::kOk: ++stats_.routed; break;
      case RouteStatus::kIgnored: ++stats_.ignored; break;
      case RouteStatus::kRejected: ++stats_.rejected; break;
    }
    observers = observers_;
  }
  if (result.status != RouteStatus::kOk) {
    Log(std::string(result.status == RouteStatus::kIgnored ? "ignored " : "rejected ") +
        Describe(message) + ": " + result.detail);
  }
  for (const auto& o : observers) o();
  return result;
}

RouteResult Router::Route(const OscMessage& m, int64_t t) {
  namespace a = osc_address;
  const OscAddressSpec* spec = FindAddressSpec(m.address);
  if (spec == nullptr || m.address.rfind("/state/", 0) == 0) {
    return {RouteStatus::kIgnored, "unknown address", {}};
  }
  if (m.type_tags() != spec->type_tags) {
    return Rejected("expected " + std::string(spec->type_tags) + ", got " +
                    m.type_tags());
  }

  if (m.address == a::kSeat) return OnSeat(Str(m, 0), t);
  if (m.address == a::kHeadPosition) {
    position_ = {Flt(m, 0), Flt(m, 1), Flt(m, 2)};
    return Ok();
  }
  if (m.address == a::kHeadRotation) {
    const auto o = Orientation::FromQuaternion(Flt(m, 0), Flt(m, 1), Flt(m, 2),
                                               Flt(m, 3));
    if (!o) return Rejected("degenerate quaternion");
    engine_.SetOrientation(*o);
    Record(PoseSample{t, position_, {o->w, o->x, o->y, o->z}});
    return Ok();
  }
  if (m.address == a::kUiPlay) return OnPlay(Str(m, 0), t);
  if (m.address == a::kUiStop) {
    engine_.Stop();
    Record(UiEvent{t, UiEventKind::kStop, ""});
    Notify({std::string(a::kStateTransport), {std::string("stopped")}});
    return Ok();
  }
  if (m.address == a::kUiRating) {
    const int32_t value = std::get<int32_t>(m.args[2]);
    try {
      session_.SubmitRating(Str(m, 0), Str(m, 1), value);
    } catch (const SessionError& e) {
      return Rejected(e.what());
    }
    Record(UiEvent{t, UiEventKind::kRating,
                   Str(m, 0) + " " + Str(m, 1) + " " + std::to_string(value)});
    return Ok();
  }
  if (m.address == a::kUiSource) {
    if (!LoadSources(Str(m, 0))) {
      return Rejected("unknown source sample '" + Str(m, 0) + "'");
    }
    Record(UiEvent{t, UiEventKind::kSourceSelect, Str(m, 0)});
    return Ok();
  }
  if (m.address == a::kUiTrialNext) return OnTrialNext(t);
  if (m.address == a::kUiInfo) {
    Record(UiEvent{t, UiEventKind::kInfo, Str(m, 0)});
    if (const Attribute* attr = FindAttribute(Str(m, 0))) {
      session_.set_current_attribute(attr->id);
      return Ok();
    }
    return Rejected("unknown attribute '" + Str(m, 0) + "'");
  }
  return {RouteStatus::kIgnored, "unhandled address", {}};
}

RouteResult Router::OnSeat(const std::string& label, int64_t t) {
  try {
    engine_.SelectSeat(label);
  } catch (const std::exception& e) {
    return Rejected(e.what());
  }
  Record(TeleportEvent{t, seat_, label});
  seat_ = label;
  Notify({std::string(osc_address::kStateSeat), {label}});
  return Ok();
}

RouteResult Router::OnPlay(const std::string& label, int64_t t) {
  ConditionId condition;
  try {
    condition = session_.ResolveStimulus(label);
    engine_.SwitchCondition(condition);
  } catch (const std::exception& e) {
    return Rejected(e.what());
  }
  const bool was_playing = engine_.state().transport == Transport::kPlaying;
  if (!was_playing) engine_.Play();
  active_label_ = label;
  Record(UiEvent{t, UiEventKind::kPlay, label});
  if (!was_playing) {
    Notify({std::string(osc_address::kStateTransport), {std::string("playing")}});
  }
  return Ok();
}

RouteResult Router::OnTrialNext(int64_t t) {
  try {
    if (session_.phase() == SessionPhase::kFamiliarization) {
      session_.BeginRating();
    } else {
      session_.CompleteTrial();
    }
  } catch (const SessionError& e) {
    return Rejected(e.what(), e.missing());
  }
  const bool done = session_.phase() == SessionPhase::kDone;
  Record(UiEvent{t, UiEventKind::kTrialAdvance,
                 done ? "done" : std::to_string(session_.trial_index() + 1)});
  engine_.Stop();
  engine_.Seek(0);
  active_label_.clear();
  Notify({std::string(osc_address::kStateTransport), {std::string("stopped")}});
  if (done) {
    try {
      session_.Finalize(options_.results_dir, options_.telemetry_file);
    } catch (const SessionError& e) {
      Log(std::string("finalize failed: ") + e.what());
    }
    if (telemetry_ != nullptr) telemetry_->Flush();
  } else if (!LoadSources(session_.trial_source())) {
    Log("trial source '" + session_.trial_source() + "' is not loaded");
  }
  NotifyTrial();
  return Ok();
}

UiView Router::View() const {
  std::lock_guard<std::mutex> lock(mu_);
  UiView v;
  v.phase = session_.phase();
  v.trial = v.phase == SessionPhase::kRating ? session_.trial_index() + 1 : 0;
  v.trial_count = session_.trial_count();
  v.attribute = session_.current_attribute();
  if (v.phase != SessionPhase::kDone) v.labels = session_.labels();
  if (v.phase == SessionPhase::kRating) {
    for (AttributeId a : session_.config().attributes) {
      for (const auto& label : v.labels) {
        if (auto r = session_.Rating(a, label)) {
          v.ratings[std::string(GetAttribute(a).key)][label] = *r;
        }
      }
    }
  }
  v.active_label = active_label_;
  v.seat = seat_;
  v.transport = engine_.state().transport;
  v.source = source_;
  for (const auto& [id, sample] : samples_) v.available_sources.push_back(id);
  v.finalized = session_.finalized();
  return v;
}

void Router::Shutdown() {
  std::lock_guard<std::mutex> lock(mu_);
  if (shut_down_) return;
  shut_down_ = true;
  Record(SessionEnd{clock_()});
  try {
    if (session_.phase() == SessionPhase::kDone) {
      session_.Finalize(options_.results_dir, options_.telemetry_file);
    } else {
      session_.Abort(options_.results_dir, options_.telemetry_file);
    }
  } catch (const SessionError& e) {
    Log(std::string("persisting results failed: ") + e.what());
  }
  if (telemetry_ != nullptr) telemetry_->Flush();
}

}  // namespace auralab
