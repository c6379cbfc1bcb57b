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
#include <fstream>
#include <set>
#include <sstream>

#include "auralab/session.h"
#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.h"

namespace auralab {
namespace {

SessionConfig ThreeTrials(uint64_t seed = 42) {
  SessionConfig c;
  c.assessor_id = "a01";
  c.session_id = "s1";
  c.trials = {"castanets", "speech", "guitar"};
  c.rng_seed = seed;
  return c;
}

struct FakeClock {
  int64_t now = 1'700'000'000'000;
  UnixClock fn() {
    return [this] { return now += 7; };
  }
};

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void RateAll(Session& s, int value = 50) {
  for (const auto& a : Attributes()) {
    for (const auto& label : s.labels()) s.SubmitRating(a.key, label, value);
  }
}

SessionErrc CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    return e.code();
  }
  FAIL("expected SessionError");
  return SessionErrc::kInvalidConfig;
}

TEST_CASE("attributes") {
  REQUIRE(Attributes().size() == 4);
  CHECK(GetAttribute(AttributeId::kBasicAudioQuality).low_label == "0");
  CHECK(GetAttribute(AttributeId::kBasicAudioQuality).high_label == "100");
  CHECK(GetAttribute(AttributeId::kLocalizability).low_label == "More difficult");
  CHECK(GetAttribute(AttributeId::kLocalizability).high_label == "Easier");
  for (auto id : {AttributeId::kSpatialQuality, AttributeId::kTimbralQuality}) {
    CHECK(GetAttribute(id).low_label == "Low Quality");
    CHECK(GetAttribute(id).high_label == "High Quality");
  }
  CHECK(std::string(GetAttribute(AttributeId::kLocalizability).description)
            .find("spatial extent and location of a sound source are difficult "
                  "to estimate") != std::string::npos);
  CHECK(FindAttribute("timbral_quality")->id == AttributeId::kTimbralQuality);
  CHECK(FindAttribute("loudness") == nullptr);
}

TEST_CASE("label maps are seeded bijections") {
  const auto a = GenerateLabelMaps(ThreeTrials(42));
  const auto b = GenerateLabelMaps(ThreeTrials(42));
  CHECK(a == b);
  REQUIRE(a.size() == 3);
  const auto conditions = ThreeTrials().conditions_under_test;
  const std::set<ConditionId> expected(conditions.begin(), conditions.end());
  for (const auto& map : a) {
    std::set<std::string> labels;
    std::set<ConditionId> conds;
    for (const auto& [l, c] : map) {
      labels.insert(l);
      conds.insert(c);
    }
    CHECK(labels == std::set<std::string>{"A", "B", "C", "D"});
    CHECK(conds == expected);
  }
}

TEST_CASE("1000 seeds give bijections and different seeds differ") {
  int differ = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    const auto maps = GenerateLabelMaps(ThreeTrials(seed));
    for (const auto& map : maps) {
      std::set<ConditionId> conds;
      for (const auto& [l, c] : map) conds.insert(c);
      CHECK(conds.size() == 4);
      CHECK(map.size() == 4);
    }
    if (maps != GenerateLabelMaps(ThreeTrials(seed + 1))) ++differ;
  }
  CHECK(differ >= 990);
}

TEST_CASE("label permutations are uniform (chi-square)") {
  // 24 permutations of 4 conditions; 24000 draws; df = 23. The 0.999
  // quantile of chi-square(23) is 49.73.
  SessionConfig c = ThreeTrials();
  c.trials = {"x"};
  std::map<std::vector<ConditionId>, int> counts;
  const int draws = 24000;
  for (int seed = 0; seed < draws; ++seed) {
    c.rng_seed = uint64_t(seed) * 7919 + 3;
    const auto map = GenerateLabelMaps(c).front();
    std::vector<ConditionId> order;
    for (const auto& [l, cond] : map) order.push_back(cond);
    ++counts[order];
  }
  CHECK(counts.size() == 24);
  const double expected = draws / 24.0;
  double chi2 = 0.0;
  for (const auto& [order, n] : counts) {
    chi2 += (n - expected) * (n - expected) / expected;
  }
  CHECK(chi2 < 49.73);
}

TEST_CASE("config validation") {
  auto invalid = [](SessionConfig c) {
    return CodeOf([&] { Session s(c); }) == SessionErrc::kInvalidConfig;
  };
  SessionConfig c = ThreeTrials();
  c.conditions_under_test = {ConditionId::NonParametric(), ConditionId::Parametric()};
  CHECK(invalid(c));
  c.conditions_under_test = {ConditionId::HiddenReference()};
  CHECK(invalid(c));
  c.conditions_under_test = {ConditionId::HiddenReference(),
                             ConditionId::HiddenReference(),
                             ConditionId::Parametric()};
  CHECK(invalid(c));
  c.conditions_under_test = {ConditionId::HiddenReference(), ConditionId::Reference()};
  CHECK(invalid(c));
  c = ThreeTrials();
  c.trials.clear();
  CHECK(invalid(c));
  c = ThreeTrials();
  c.assessor_id = "../evil";
  CHECK(invalid(c));
  c = ThreeTrials();
  c.rating_threshold = 101;
  CHECK(invalid(c));
  CHECK_NOTHROW(Session{ThreeTrials()});
}

TEST_CASE("rating flow") {
  FakeClock clock;
  Session s(ThreeTrials(), clock.fn());
  CHECK(s.phase() == SessionPhase::kFamiliarization);
  CHECK(s.ResolveStimulus("ref") == ConditionId::Reference());
  CHECK(CodeOf([&] { s.SubmitRating("localizability", "A", 73); }) ==
        SessionErrc::kWrongPhase);
  CHECK(CodeOf([&] { s.CompleteTrial(); }) == SessionErrc::kWrongPhase);

  s.BeginRating();
  CHECK(s.phase() == SessionPhase::kRating);
  CHECK(CodeOf([&] { s.BeginRating(); }) == SessionErrc::kWrongPhase);

  s.SubmitRating("basic_audio_quality", "C", 85);
  CHECK(s.Rating(AttributeId::kBasicAudioQuality, "C") == 85);
  s.SubmitRating("basic_audio_quality", "C", 60);
  CHECK(s.Rating(AttributeId::kBasicAudioQuality, "C") == 60);
  CHECK(s.current_attribute() == AttributeId::kBasicAudioQuality);

  CHECK(CodeOf([&] { s.SubmitRating("basic_audio_quality", "C", 101); }) ==
        SessionErrc::kOutOfRange);
  CHECK(CodeOf([&] { s.SubmitRating("basic_audio_quality", "C", -1); }) ==
        SessionErrc::kOutOfRange);
  CHECK(CodeOf([&] { s.SubmitRating("basic_audio_quality", "ref", 50); }) ==
        SessionErrc::kUnknownLabel);
  CHECK(CodeOf([&] { s.SubmitRating("basic_audio_quality", "E", 50); }) ==
        SessionErrc::kUnknownLabel);
  CHECK(CodeOf([&] { s.SubmitRating("loudness", "A", 50); }) ==
        SessionErrc::kUnknownAttribute);
  CHECK(CodeOf([&] { s.ResolveStimulus("Z"); }) == SessionErrc::kUnknownLabel);

  RateAll(s);
  s.SubmitRating("timbral_quality", "D", 10);
  CHECK(s.MissingCells().empty());
  s.CompleteTrial();
  CHECK(s.trial_index() == 1);

  // 15 of 16 rated.
  for (const auto& a : Attributes()) {
    for (const auto& label : s.labels()) {
      if (a.id == AttributeId::kSpatialQuality && label == "B") continue;
      s.SubmitRating(a.key, label, 40);
    }
  }
  try {
    s.CompleteTrial();
    FAIL("expected Incomplete");
  } catch (const SessionError& e) {
    CHECK(e.code() == SessionErrc::kIncomplete);
    REQUIRE(e.missing().size() == 1);
    CHECK(e.missing()[0] == RatingCell{AttributeId::kSpatialQuality, "B"});
  }
  s.SubmitRating("spatial_quality", "B", 40);
  s.CompleteTrial();
  RateAll(s, 70);
  s.CompleteTrial();
  CHECK(s.phase() == SessionPhase::kDone);
  CHECK(CodeOf([&] { s.SubmitRating("localizability", "A", 1); }) ==
        SessionErrc::kWrongPhase);
  CHECK(CodeOf([&] { s.ResolveStimulus("A"); }) == SessionErrc::kWrongPhase);
}

TEST_CASE("finalize unblinds, persists atomically and is idempotent") {
  testing::TempDir dir;
  FakeClock clock;
  const int64_t t0 = clock.now;
  Session s(ThreeTrials(7), clock.fn());
  CHECK(CodeOf([&] { s.Finalize(dir.path()); }) == SessionErrc::kNotFinished);
  s.BeginRating();
  for (int t = 0; t < 3; ++t) {
    for (const auto& a : Attributes()) {
      for (const auto& label : s.labels()) {
        s.SubmitRating(a.key, label, 10 * t + int(label[0] - 'A'));
      }
    }
    s.CompleteTrial();
  }
  // Nothing that reveals the label map exists before finalization.
  CHECK(std::filesystem::is_empty(dir.path()));

  const auto result = s.Finalize(dir.path(), "telemetry_a01_s1.jsonl");
  const int64_t t_end = clock.now;
  REQUIRE(result.ratings.size() == 48);
  const auto maps = GenerateLabelMaps(ThreeTrials(7));
  for (const auto& r : result.ratings) {
    CHECK(r.condition == maps[r.trial - 1].at(r.label));
    CHECK(r.value == 10 * (r.trial - 1) + int(r.label[0] - 'A'));
    CHECK(r.unix_ms >= t0);
    CHECK(r.unix_ms <= t_end);
  }

  const auto csv_path = dir / "results_a01_s1.csv";
  const std::string first = Slurp(csv_path);
  CHECK(first.rfind(std::string(kResultsCsvHeader) + "\n", 0) == 0);
  CHECK(ReadResultsCsv(csv_path) == result.ratings);
  const auto hidden_rows = std::count_if(
      result.ratings.begin(), result.ratings.end(),
      [](const RatingRecord& r) { return r.condition.id() == "hidden_reference"; });
  CHECK(hidden_rows == 12);
  CHECK(first.find(",hidden_reference,") != std::string::npos);

  const auto meta = nlohmann::json::parse(Slurp(dir / "results_a01_s1.json"));
  CHECK(meta["status"] == "complete");
  CHECK(meta["telemetry"] == "telemetry_a01_s1.jsonl");
  CHECK(meta["trials"].size() == 3);

  s.Finalize(dir.path(), "telemetry_a01_s1.jsonl");
  CHECK(Slurp(csv_path) == first);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("abort persists partial results marked aborted") {
  testing::TempDir dir;
  Session s(ThreeTrials());
  s.BeginRating();
  s.SubmitRating("localizability", "A", 30);
  const auto r = s.Abort(dir.path());
  CHECK(r.aborted);
  CHECK(r.ratings.size() == 1);
  CHECK(ReadResultsCsv(dir / "results_a01_s1.aborted.csv").size() == 1);
  const auto meta =
      nlohmann::json::parse(Slurp(dir / "results_a01_s1.aborted.json"));
  CHECK(meta["status"] == "aborted");
}

TEST_CASE("results CSV parsing rejects malformed rows") {
  CHECK_THROWS_AS(ParseResultsCsv(""), SessionError);
  CHECK_THROWS_AS(ParseResultsCsv("a,b,c\n"), SessionError);
  const std::string header = std::string(kResultsCsvHeader) + "\n";
  CHECK_THROWS_AS(ParseResultsCsv(header + "a01,1,loudness,parametric,A,5,1\n"),
                  SessionError);
  CHECK_THROWS_AS(ParseResultsCsv(header + "a01,1,localizability,parametric,A,500,1\n"),
                  SessionError);
  CHECK(ParseResultsCsv(header + "a01,2,localizability,parametric,A,50,1\r\n")
            .front()
            .trial == 2);
}

TEST_CASE("stimulus labels") {
  CHECK(StimulusLabel(0) == "A");
  CHECK(StimulusLabel(25) == "Z");
  CHECK(StimulusLabel(26) == "AA");
}

}  // namespace
}  // namespace auralab
