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


#include <cmath>
#include <random>
#include <regex>

#include "auralab/analysis.h"
#include "doctest.h"

namespace auralab {
namespace {

// 3 trials x 4 attributes of hidden-reference ratings, `below` of them < 90.
AssessorRatings Cohort(const std::string& id, int below, int low = 60) {
  AssessorRatings a{id, {}};
  int item = 0;
  for (int trial = 1; trial <= 3; ++trial) {
    for (const auto& attr : Attributes()) {
      const int v = item++ < below ? low : 95;
      a.ratings.push_back({id, trial, attr.id, ConditionId::HiddenReference(), "A",
                           v, 0});
      a.ratings.push_back({id, trial, attr.id, ConditionId::Parametric(), "B",
                           50, 0});
    }
  }
  return a;
}

TEST_CASE("screening boundary at more than 15 percent") {
  const auto out = ScreenAssessors({Cohort("x2", 2), Cohort("x1", 1), Cohort("ok", 0)});
  REQUIRE(out.size() == 3);
  CHECK(out[0].hidden_ref_ratings.size() == 12);
  CHECK(out[0].below_threshold_fraction == doctest::Approx(2.0 / 12));
  CHECK(out[0].excluded);
  CHECK(out[1].below_threshold_fraction == doctest::Approx(1.0 / 12));
  CHECK_FALSE(out[1].excluded);
  CHECK(out[2].below_threshold_fraction == 0.0);
  CHECK_FALSE(out[2].excluded);
}

TEST_CASE("a rating equal to the threshold is not below it") {
  const auto out = ScreenAssessors({Cohort("edge", 12, 90)});
  CHECK(out[0].below_threshold_fraction == 0.0);
}

TEST_CASE("screening is monotone in the threshold") {
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 200; ++trial) {
    AssessorRatings a{"r", {}};
    for (int i = 0; i < 12; ++i) {
      a.ratings.push_back({"r", 1, AttributeId::kBasicAudioQuality,
                           ConditionId::HiddenReference(), "A", int(rng() % 101), 0});
    }
    bool was_excluded = false;
    for (int threshold = 0; threshold <= 100; ++threshold) {
      const bool excluded = ScreenAssessors({a}, threshold, 0.15)[0].excluded;
      CHECK((!was_excluded || excluded));
      was_excluded = excluded;
    }
  }
}

TEST_CASE("assessor without hidden reference") {
  AssessorRatings a{"n", {{"n", 1, AttributeId::kBasicAudioQuality,
                           ConditionId::Parametric(), "A", 50, 0}}};
  try {
    ScreenAssessors({a});
    FAIL("expected NoHiddenReference");
  } catch (const AnalysisError& e) {
    CHECK(e.code() == AnalysisErrc::kNoHiddenReference);
  }
}

RatingRecord Row(const std::string& who, int trial, int value,
                 ConditionId c = ConditionId::Parametric(),
                 AttributeId a = AttributeId::kSpatialQuality) {
  return {who, trial, a, c, "A", value, 0};
}

TEST_CASE("aggregate: identical ratings give zero-width intervals") {
  std::vector<AssessorRatings> in;
  for (const char* who : {"a", "b", "c"}) {
    in.push_back({who, {Row(who, 1, 64), Row(who, 2, 64)}});
  }
  const auto cells = Aggregate(in);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].n == 3);
  CHECK(cells[0].mean == 64.0);
  CHECK(cells[0].ci_low == 64.0);
  CHECK(cells[0].ci_high == 64.0);
  CHECK_FALSE(cells[0].degenerate);
}

TEST_CASE("aggregate: two assessors at 60 and 80 clip to the scale") {
  // t(0.975, 1) = 12.7062; sd = 14.1421; half-width 127.06.
  CHECK(StudentTQuantile(0.975, 1) == doctest::Approx(12.7062).epsilon(1e-5));
  const auto cells = Aggregate({{"a", {Row("a", 1, 60)}}, {"b", {Row("b", 1, 80)}}});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].mean == 70.0);
  CHECK(cells[0].ci_low == 0.0);
  CHECK(cells[0].ci_high == 100.0);
}

TEST_CASE("aggregate: Student-t interval over per-assessor means") {
  // Means 50, 60, 70 (each from two trials): sd = 10, t(0.975, 2) = 4.302653.
  const auto cells = Aggregate({{"a", {Row("a", 1, 45), Row("a", 2, 55)}},
                                {"b", {Row("b", 1, 60), Row("b", 2, 60)}},
                                {"c", {Row("c", 1, 80), Row("c", 2, 60)}}});
  const double half = 4.302653 * 10.0 / std::sqrt(3.0);
  CHECK(cells[0].mean == doctest::Approx(60.0));
  CHECK(cells[0].ci_low == doctest::Approx(60.0 - half).epsilon(1e-6));
  CHECK(cells[0].ci_high == doctest::Approx(60.0 + half).epsilon(1e-6));

  AggregateOptions pooled;
  pooled.pooled = true;
  const auto p = Aggregate({{"a", {Row("a", 1, 45), Row("a", 2, 55)}},
                            {"b", {Row("b", 1, 60), Row("b", 2, 60)}},
                            {"c", {Row("c", 1, 80), Row("c", 2, 60)}}},
                           pooled);
  CHECK(p[0].n == 6);
  CHECK(p[0].mean == doctest::Approx(60.0));
}

TEST_CASE("aggregate: single assessor is degenerate at the exact mean") {
  const auto cells = Aggregate({{"a", {Row("a", 1, 33), Row("a", 2, 40), Row("a", 3, 50)}}});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].degenerate);
  CHECK(cells[0].mean == doctest::Approx(41.0));
  CHECK(cells[0].ci_low == cells[0].mean);
  CHECK(cells[0].ci_high == cells[0].mean);
}

TEST_CASE("aggregate output is sorted and bounds hold") {
  std::mt19937_64 rng(81);
  std::vector<AssessorRatings> in;
  const ConditionId conds[] = {ConditionId::Parametric(), ConditionId::HiddenReference(),
                               ConditionId::LowpassAnchor(), ConditionId::NonParametric()};
  for (int p = 0; p < 6; ++p) {
    AssessorRatings a{"p" + std::to_string(p), {}};
    for (int t = 1; t <= 3; ++t) {
      for (const auto& attr : Attributes()) {
        for (const auto& c : conds) {
          a.ratings.push_back({a.assessor_id, t, attr.id, c, "A", int(rng() % 101), 0});
        }
      }
    }
    in.push_back(a);
  }
  const auto cells = Aggregate(in);
  CHECK(cells.size() == 16);
  for (size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].ci_low <= cells[i].mean);
    CHECK(cells[i].mean <= cells[i].ci_high);
    CHECK(cells[i].ci_low >= 0.0);
    CHECK(cells[i].ci_high <= 100.0);
    CHECK(cells[i].n == 6);
    if (i > 0) {
      CHECK(std::tie(cells[i - 1].attribute, cells[i - 1].condition) <
            std::tie(cells[i].attribute, cells[i].condition));
    }
  }
  CHECK(AggregateToCsv(cells) == AggregateToCsv(Aggregate(in)));
  CHECK_THROWS_AS(Aggregate({}), AnalysisError);
}

TEST_CASE("group by assessor keeps first-seen order") {
  const auto g = GroupByAssessor({Row("b", 1, 1), Row("a", 1, 2), Row("b", 2, 3)});
  REQUIRE(g.size() == 2);
  CHECK(g[0].assessor_id == "b");
  CHECK(g[0].ratings.size() == 2);
}

std::vector<double> Radii(const std::string& svg) {
  std::vector<double> out;
  const std::regex re(R"re( r="([0-9.]+)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.push_back(std::stod((*it)[1]));
  }
  return out;
}

std::vector<std::string> Fills(const std::string& svg) {
  std::vector<std::string> out;
  const std::regex re(R"re(<circle[^>]*fill="(#[0-9a-f]{6})")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

TEST_CASE("heatmap: empty map") {
  CHECK(HeatmapToCsv(HeatmapTable({})) == "seat,x,y,dwell_ms,visits\n");
  const auto svg = HeatmapToSvg({});
  CHECK(svg.find("<circle") == std::string::npos);
  CHECK(svg.find("id=\"grid\"") != std::string::npos);
}

TEST_CASE("heatmap: area proportional to dwell") {
  const auto svg = HeatmapToSvg({{"A1", {10000, 1}}, {"B2", {40000, 1}}});
  const auto r = Radii(svg);
  REQUIRE(r.size() == 2);
  CHECK(r[1] / r[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("heatmap: gray darkens monotonically with visits") {
  const auto svg =
      HeatmapToSvg({{"A1", {1000, 1}}, {"A2", {1000, 5}}, {"A3", {1000, 10}}});
  const auto fills = Fills(svg);
  REQUIRE(fills.size() == 3);
  const auto level = [](const std::string& hex) {
    return std::stoi(hex.substr(1, 2), nullptr, 16);
  };
  CHECK(level(fills[0]) > level(fills[1]));
  CHECK(level(fills[1]) > level(fills[2]));
}

TEST_CASE("heatmap table") {
  const auto rows = HeatmapTable({{"C4", {60000, 2}}, {"A1", {5, 1}}});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seat == "A1");
  CHECK(rows[1].seat == "C4");
  CHECK(rows[1].x == 3.0);
  CHECK(rows[1].y == 2.0);
  CHECK(HeatmapToCsv(rows) ==
        "seat,x,y,dwell_ms,visits\nA1,0.000,0.000,5,1\nC4,3.000,2.000,60000,2\n");
}

}  // namespace
}  // namespace auralab
