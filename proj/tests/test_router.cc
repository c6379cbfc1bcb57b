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


#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include "auralab/router.h"
#include "doctest.h"
#include "support/fixtures.h"

namespace auralab {
namespace {

struct Rig {
  testing::TempDir dir;
  std::unique_ptr<ArirSet> arirs;
  std::map<std::string, SourceSample> samples;
  std::unique_ptr<Engine> engine;
  std::unique_ptr<Session> session;
  std::unique_ptr<TelemetryLog> telemetry;
  std::mutex mu;
  std::vector<OscMessage> notes;
  std::unique_ptr<UdpEndpoint> listener;
  std::unique_ptr<UdpSender> notifier;
  std::unique_ptr<Router> router;
  int64_t now = 0;

  explicit Rig(int trials = 1) {
    std::mt19937_64 rng(90);
    testing::FixtureSpec spec;
    spec.conditions = {{"reference", "ref"},
                       {"parametric", "par"},
                       {"non_parametric", "np"}};
    const auto manifest = testing::MakeManifest(spec);
    arirs = std::make_unique<ArirSet>(manifest,
                                      testing::RandomEntries(manifest, rng, 16));
    for (const char* id : {"castanets", "speech"}) {
      samples[id] = testing::RandomSource(rng, 0.2, 48000, id);
    }
    EngineOptions o;
    o.block = 64;
    engine = std::make_unique<Engine>(
        *arirs, MakeOmniDecoder(2, AmbisonicConvention::kAcnSn3d), o);
    SessionConfig c;
    c.assessor_id = "a01";
    c.session_id = "s1";
    c.trials.assign(trials, "castanets");
    c.rng_seed = 5;
    session = std::make_unique<Session>(c);
    telemetry = std::make_unique<TelemetryLog>(dir / "telemetry.jsonl");
    listener = std::make_unique<UdpEndpoint>(
        "127.0.0.1", 0, [this](const OscMessage& m, const UdpPeer&) {
          std::lock_guard<std::mutex> lock(mu);
          notes.push_back(m);
        });
    notifier = std::make_unique<UdpSender>("127.0.0.1", listener->port());
    RouterOptions ro;
    ro.results_dir = dir.path();
    ro.telemetry_file = "telemetry.jsonl";
    router = std::make_unique<Router>(*session, *engine, samples, telemetry.get(),
                                      notifier.get(), ro, [this] { return now; });
    router->Start();
  }

  RouteResult Send(OscMessage m) { return router->Dispatch(m); }

  // Waits until `last` has arrived (or 3 s pass) and returns everything.
  std::vector<OscMessage> Notes(const OscMessage& last) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(3);
    for (;;) {
      {
        std::lock_guard<std::mutex> lock(mu);
        if (std::find(notes.begin(), notes.end(), last) != notes.end() ||
            std::chrono::steady_clock::now() > deadline) {
          return notes;
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
};

OscMessage Msg(std::string_view address, std::vector<OscArg> args = {}) {
  return OscMessage{std::string(address), std::move(args)};
}

TEST_CASE("seat message switches the engine and logs a teleport") {
  Rig rig;
  const std::string start = rig.engine->state().seat;
  rig.now = 1500;
  CHECK(rig.Send(Msg("/seat", {std::string("C4")})).status == RouteStatus::kOk);
  CHECK(rig.engine->state().seat == "C4");
  CHECK(rig.router->View().seat == "C4");
  CHECK(rig.Send(Msg("/seat", {std::string("Z9")})).status == RouteStatus::kRejected);
  CHECK(rig.engine->state().seat == "C4");

  rig.telemetry->Flush();
  const auto events = ReadTelemetry(rig.dir / "telemetry.jsonl");
  std::vector<TeleportEvent> teleports;
  for (const auto& e : events) {
    if (auto* t = std::get_if<TeleportEvent>(&e)) teleports.push_back(*t);
  }
  REQUIRE(teleports.size() == 2);
  CHECK(teleports[0].to_seat == start);
  CHECK_FALSE(teleports[0].from_seat.has_value());
  CHECK(teleports[1] == TeleportEvent{1500, start, "C4"});

  const auto seat_note = Msg("/state/seat", {std::string("C4")});
  const auto notes = rig.Notes(seat_note);
  CHECK(std::find(notes.begin(), notes.end(), seat_note) != notes.end());
}

TEST_CASE("play resolves labels through the hidden map") {
  Rig rig;
  const auto maps = GenerateLabelMaps(rig.session->config());
  for (const auto& [label, condition] : maps[0]) {
    CHECK(rig.Send(Msg("/ui/play", {label})).status == RouteStatus::kOk);
    CHECK(rig.engine->state().active_condition == condition);
    CHECK(rig.engine->state().transport == Transport::kPlaying);
    CHECK(rig.router->View().active_label == label);
  }
  CHECK(rig.Send(Msg("/ui/play", {std::string("ref")})).status == RouteStatus::kOk);
  CHECK(rig.engine->state().active_condition == ConditionId::Reference());
  CHECK(rig.Send(Msg("/ui/play", {std::string("Q")})).status == RouteStatus::kRejected);
  CHECK(rig.Send(Msg("/ui/stop")).status == RouteStatus::kOk);
  CHECK(rig.engine->state().transport == Transport::kStopped);
}

TEST_CASE("rating before any trial started is logged and ignored") {
  Rig rig;
  const auto r = rig.Send(Msg("/ui/rating", {std::string("localizability"),
                                             std::string("A"), 73}));
  CHECK(r.status == RouteStatus::kRejected);
  CHECK(rig.session->phase() == SessionPhase::kFamiliarization);
  CHECK(rig.router->stats().rejected == 1);
}

TEST_CASE("signature mismatches and unknown addresses") {
  Rig rig;
  CHECK(rig.Send(Msg("/seat", {42})).status == RouteStatus::kRejected);
  CHECK(rig.Send(Msg("/head/rotation", {1.0f, 0.0f, 0.0f})).status ==
        RouteStatus::kRejected);
  CHECK(rig.Send(Msg("/head/rotation", {0.0f, 0.0f, 0.0f, 0.0f})).status ==
        RouteStatus::kRejected);
  CHECK(rig.Send(Msg("/unknown/thing")).status == RouteStatus::kIgnored);
  CHECK(rig.Send(Msg("/state/seat", {std::string("A1")})).status ==
        RouteStatus::kIgnored);
  CHECK(rig.router->stats().ignored == 2);
}

TEST_CASE("pose messages update orientation and log one row per rotation") {
  Rig rig;
  rig.now = 10;
  rig.Send(Msg("/head/position", {0.5f, 1.0f, 1.6f}));
  rig.Send(Msg("/head/rotation", {0.0f, 0.0f, 0.0f, 2.0f}));
  const auto o = rig.engine->state().orientation;
  CHECK(o.w == 0.0);
  CHECK(o.z == 1.0);
  rig.telemetry->Flush();
  int poses = 0;
  for (const auto& e : ReadTelemetry(rig.dir / "telemetry.jsonl")) {
    if (const auto* p = std::get_if<PoseSample>(&e)) {
      ++poses;
      CHECK(p->position[0] == doctest::Approx(0.5));
      CHECK(p->orientation[3] == 1.0);
    }
  }
  CHECK(poses == 1);
}

TEST_CASE("a full trial produces results and label-blind notifications") {
  Rig rig(2);
  CHECK(rig.Send(Msg("/ui/trial/next")).status == RouteStatus::kOk);
  CHECK(rig.router->View().phase == SessionPhase::kRating);
  CHECK(rig.router->View().trial == 1);
  for (int t = 0; t < 2; ++t) {
    for (const auto& label : rig.router->View().labels) {
      rig.Send(Msg("/ui/play", {label}));
      for (const auto& a : Attributes()) {
        CHECK(rig.Send(Msg("/ui/rating", {std::string(a.key), label, 80})).status ==
              RouteStatus::kOk);
      }
    }
    if (t == 0) {
      rig.Send(Msg("/ui/rating", {std::string("localizability"), std::string("A"), 7}));
      const auto v = rig.router->View();
      CHECK(v.ratings.at("localizability").at("A") == 7);
      CHECK(v.ratings.at("timbral_quality").size() == 4);
    }
    CHECK(rig.Send(Msg("/ui/trial/next")).status == RouteStatus::kOk);
  }
  CHECK(rig.router->View().phase == SessionPhase::kDone);
  CHECK(rig.router->View().finalized);
  const auto rows = ReadResultsCsv(rig.dir / "results_a01_s1.csv");
  CHECK(rows.size() == 32);

  const auto done_note = Msg("/state/trial", {kTrialStateDone});
  const auto notes = rig.Notes(done_note);
  CHECK(std::find(notes.begin(), notes.end(), done_note) != notes.end());
  for (const auto& n : notes) {
    for (const auto& arg : n.args) {
      if (const auto* s = std::get_if<std::string>(&arg)) {
        for (const char* id : {"hidden_reference", "parametric", "non_parametric",
                               "lowpass_anchor", "reference"}) {
          CHECK(s->find(id) == std::string::npos);
        }
      }
    }
  }
}

TEST_CASE("incomplete trial advance is rejected with the missing cells") {
  Rig rig;
  rig.Send(Msg("/ui/trial/next"));
  rig.Send(Msg("/ui/rating", {std::string("localizability"), std::string("A"), 50}));
  const auto r = rig.Send(Msg("/ui/trial/next"));
  CHECK(r.status == RouteStatus::kRejected);
  CHECK(r.missing.size() == 15);
}

TEST_CASE("shutdown mid-session writes aborted results and an end record") {
  Rig rig;
  rig.Send(Msg("/ui/trial/next"));
  rig.now = 3000;
  rig.Send(Msg("/seat", {std::string("B2")}));
  rig.now = 9000;
  rig.router->Shutdown();
  rig.router->Shutdown();
  CHECK(std::filesystem::exists(rig.dir / "results_a01_s1.aborted.csv"));
  rig.telemetry->Close();
  const auto events = ReadTelemetry(rig.dir / "telemetry.jsonl");
  CHECK(std::holds_alternative<SessionEnd>(events.back()));
  int64_t total = 0;
  for (const auto& [seat, d] : ComputeDwell(events)) total += d.dwell_ms;
  CHECK(total == 9000);
  CHECK(rig.Send(Msg("/ui/stop")).status == RouteStatus::kIgnored);
}

TEST_CASE("source selection") {
  Rig rig;
  CHECK(rig.Send(Msg("/ui/source", {std::string("speech")})).status == RouteStatus::kOk);
  CHECK(rig.router->View().source == "speech");
  CHECK(rig.Send(Msg("/ui/source", {std::string("castanets+speech")})).status ==
        RouteStatus::kOk);
  CHECK(rig.Send(Msg("/ui/source", {std::string("drums")})).status ==
        RouteStatus::kRejected);
  CHECK(rig.Send(Msg("/ui/info", {std::string("spatial_quality")})).status ==
        RouteStatus::kOk);
  CHECK(rig.router->View().attribute == AttributeId::kSpatialQuality);
}

}  // namespace
}  // namespace auralab
