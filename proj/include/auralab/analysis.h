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


// Post-session analysis: hidden-reference screening, per-cell aggregation
// with Student-t confidence intervals, and seat-occupancy heatmaps.

#ifndef AURALAB_ANALYSIS_H_
#define AURALAB_ANALYSIS_H_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "auralab/arir_store.h"
#include "auralab/session.h"
#include "auralab/telemetry.h"

namespace auralab {

enum class AnalysisErrc { kNoHiddenReference, kEmptyInput };

class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(AnalysisErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  AnalysisErrc code() const { return code_; }

 private:
  AnalysisErrc code_;
};

// All ratings of one assessor (one or more sessions).
struct AssessorRatings {
  std::string assessor_id;
  std::vector<RatingRecord> ratings;
};

// Groups rows by their assessor column, preserving first-seen order.
std::vector<AssessorRatings> GroupByAssessor(
    const std::vector<RatingRecord>& rows);

struct ScreeningOutcome {
  std::string assessor_id;
  std::vector<int> hidden_ref_ratings;
  double below_threshold_fraction = 0.0;
  bool excluded = false;
};

// An assessor is excluded iff the fraction of hidden-reference ratings
// strictly below `threshold` is strictly greater than `fraction`.
// Throws kNoHiddenReference for an assessor without hidden-reference rows.
std::vector<ScreeningOutcome> ScreenAssessors(
    const std::vector<AssessorRatings>& results, int threshold = 90,
    double fraction = 0.15);

struct AggregateCell {
  AttributeId attribute = AttributeId::kBasicAudioQuality;
  ConditionId condition;
  int n = 0;  // assessors (or ratings when pooled)
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Fewer than two samples: the interval collapses to the mean.
  bool degenerate = false;
};

struct AggregateOptions {
  // CI over all ratings instead of per-assessor means.
  bool pooled = false;
  double confidence = 0.95;
};

// Mean over every rating of the cell; CI from the Student-t quantile with
// n-1 degrees of freedom, clipped to [0, 100]. Sorted by (attribute,
// condition). Throws kEmptyInput.
std::vector<AggregateCell> Aggregate(const std::vector<AssessorRatings>& included,
                                     const AggregateOptions& options = {});

// Two-sided Student-t quantile t(p, df).
double StudentTQuantile(double p, double df);

std::string ScreeningToCsv(const std::vector<ScreeningOutcome>& outcomes);
std::string AggregateToCsv(const std::vector<AggregateCell>& cells);

struct HeatmapRow {
  std::string seat;
  double x = 0.0;
  double y = 0.0;
  int64_t dwell_ms = 0;
  int visits = 0;
};

// Rows in grid order. Coordinates are the manifest seat positions when a
// manifest is given, otherwise (column, row) grid indices.
std::vector<HeatmapRow> HeatmapTable(const std::map<std::string, SeatDwell>& dwell,
                                     const Manifest* manifest = nullptr);
std::string HeatmapToCsv(const std::vector<HeatmapRow>& rows);

struct HeatmapStyle {
  double cell = 80.0;        // grid pitch in px
  double max_radius = 36.0;  // radius of the longest dwell
  int lightest_gray = 220;   // fill for one visit when visits vary
  int darkest_gray = 30;     // fill for the most visits
};

// 5 x 5 grid, one circle per occupied seat: area proportional to dwell,
// fill darker with more visits.
std::string HeatmapToSvg(const std::map<std::string, SeatDwell>& dwell,
                         const HeatmapStyle& style = {});

// Circle radius and gray level the SVG uses for a seat.
double HeatmapRadius(int64_t dwell_ms, int64_t max_dwell_ms,
                     const HeatmapStyle& style = {});
int HeatmapGray(int visits, int max_visits, const HeatmapStyle& style = {});

}  // namespace auralab

#endif  // AURALAB_ANALYSIS_H_
