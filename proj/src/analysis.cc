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


#include "auralab/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace auralab {
namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<AssessorRatings> GroupByAssessor(
    const std::vector<RatingRecord>& rows) {
  std::vector<AssessorRatings> out;
  std::map<std::string, size_t> index;
  for (const auto& r : rows) {
    auto [it, inserted] = index.emplace(r.assessor, out.size());
    if (inserted) out.push_back({r.assessor, {}});
    out[it->second].ratings.push_back(r);
  }
  return out;
}

std::vector<ScreeningOutcome> ScreenAssessors(
    const std::vector<AssessorRatings>& results, int threshold,
    double fraction) {
  std::vector<ScreeningOutcome> out;
  for (const auto& a : results) {
    ScreeningOutcome o;
    o.assessor_id = a.assessor_id;
    int below = 0;
    for (const auto& r : a.ratings) {
      if (r.condition.kind() != ConditionId::Kind::kHiddenReference) continue;
      o.hidden_ref_ratings.push_back(r.value);
      if (r.value < threshold) ++below;
    }
    if (o.hidden_ref_ratings.empty()) {
      throw AnalysisError(AnalysisErrc::kNoHiddenReference,
                          "NoHiddenReference: assessor '" + a.assessor_id +
                              "' has no hidden_reference ratings");
    }
    o.below_threshold_fraction = double(below) / double(o.hidden_ref_ratings.size());
    o.excluded = o.below_threshold_fraction > fraction;
    out.push_back(std::move(o));
  }
  return out;
}

double StudentTQuantile(double p, double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, p);
}

std::vector<AggregateCell> Aggregate(const std::vector<AssessorRatings>& included,
                                     const AggregateOptions& options) {
  // cell -> assessor -> values
  std::map<std::pair<AttributeId, ConditionId>,
           std::map<std::string, std::vector<double>>>
      cells;
  for (const auto& a : included) {
    for (const auto& r : a.ratings) {
      cells[{r.attribute, r.condition}][a.assessor_id].push_back(r.value);
    }
  }
  if (cells.empty()) {
    throw AnalysisError(AnalysisErrc::kEmptyInput,
                        "EmptyInput: no ratings to aggregate");
  }
  std::vector<AggregateCell> out;
  for (const auto& [key, by_assessor] : cells) {
    AggregateCell cell;
    cell.attribute = key.first;
    cell.condition = key.second;
    std::vector<double> samples;
    double sum = 0.0;
    size_t count = 0;
    for (const auto& [assessor, values] : by_assessor) {
      double s = 0.0;
      for (double v : values) s += v;
      sum += s;
      count += values.size();
      if (options.pooled) {
        samples.insert(samples.end(), values.begin(), values.end());
      } else {
        samples.push_back(s / double(values.size()));
      }
    }
    cell.mean = sum / double(count);
    cell.n = int(samples.size());
    if (samples.size() < 2) {
      cell.degenerate = true;
      cell.ci_low = cell.ci_high = cell.mean;
    } else {
      double m = 0.0;
      for (double v : samples) m += v;
      m /= double(samples.size());
      double ss = 0.0;
      for (double v : samples) ss += (v - m) * (v - m);
      const double sd = std::sqrt(ss / double(samples.size() - 1));
      const double t = StudentTQuantile(0.5 + options.confidence / 2.0,
                                        double(samples.size() - 1));
      const double half = t * sd / std::sqrt(double(samples.size()));
      cell.ci_low = std::clamp(cell.mean - half, double(kRatingMin), cell.mean);
      cell.ci_high = std::clamp(cell.mean + half, cell.mean, double(kRatingMax));
    }
    out.push_back(cell);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.attribute, a.condition) < std::tie(b.attribute, b.condition);
  });
  return out;
}

std::string ScreeningToCsv(const std::vector<ScreeningOutcome>& outcomes) {
  std::ostringstream os;
  os << "assessor,hidden_ref_items,below_threshold,below_threshold_fraction,"
        "excluded\n";
  for (const auto& o : outcomes) {
    const auto below = std::llround(o.below_threshold_fraction *
                                    double(o.hidden_ref_ratings.size()));
    os << o.assessor_id << ',' << o.hidden_ref_ratings.size() << ',' << below
       << ',' << Fixed(o.below_threshold_fraction) << ','
       << (o.excluded ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string AggregateToCsv(const std::vector<AggregateCell>& cells) {
  std::ostringstream os;
  os << "attribute,condition,n,mean,ci_low,ci_high,degenerate\n";
  for (const auto& c : cells) {
    os << GetAttribute(c.attribute).key << ',' << c.condition.id() << ','
       << c.n << ',' << Fixed(c.mean) << ',' << Fixed(c.ci_low) << ','
       << Fixed(c.ci_high) << ',' << (c.degenerate ? "true" : "false") << '\n';
  }
  return os.str();
}

std::vector<HeatmapRow> HeatmapTable(const std::map<std::string, SeatDwell>& dwell,
                                     const Manifest* manifest) {
  std::vector<HeatmapRow> rows;
  for (int r = 0; r < kSeatRows; ++r) {
    for (int c = 0; c < kSeatCols; ++c) {
      const std::string label = SeatLabel(r, c);
      const auto it = dwell.find(label);
      if (it == dwell.end()) continue;
      HeatmapRow row{label, double(c), double(r), it->second.dwell_ms,
                     it->second.visits};
      if (manifest != nullptr && manifest->HasSeat(label)) {
        const auto& p = manifest->Seat(label).position;
        row.x = p[0];
        row.y = p[1];
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string HeatmapToCsv(const std::vector<HeatmapRow>& rows) {
  std::ostringstream os;
  os << "seat,x,y,dwell_ms,visits\n";
  for (const auto& r : rows) {
    os << r.seat << ',' << Fixed(r.x, 3) << ',' << Fixed(r.y, 3) << ','
       << r.dwell_ms << ',' << r.visits << '\n';
  }
  return os.str();
}

double HeatmapRadius(int64_t dwell_ms, int64_t max_dwell_ms,
                     const HeatmapStyle& style) {
  if (max_dwell_ms <= 0 || dwell_ms <= 0) return 0.0;
  return style.max_radius * std::sqrt(double(dwell_ms) / double(max_dwell_ms));
}

int HeatmapGray(int visits, int max_visits, const HeatmapStyle& style) {
  if (max_visits <= 1) return style.darkest_gray;
  const double f = double(std::max(visits, 1) - 1) / double(max_visits - 1);
  return int(std::lround(style.lightest_gray +
                         f * (style.darkest_gray - style.lightest_gray)));
}

std::string HeatmapToSvg(const std::map<std::string, SeatDwell>& dwell,
                         const HeatmapStyle& style) {
  int64_t max_dwell = 0;
  int max_visits = 0;
  for (const auto& [seat, d] : dwell) {
    max_dwell = std::max(max_dwell, d.dwell_ms);
    max_visits = std::max(max_visits, d.visits);
  }
  const double margin = style.cell;
  const double w = margin + kSeatCols * style.cell;
  const double h = margin + kSeatRows * style.cell;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Fixed(w, 0)
     << "\" height=\"" << Fixed(h, 0) << "\" viewBox=\"0 0 " << Fixed(w, 0)
     << ' ' << Fixed(h, 0) << "\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <g id=\"grid\" stroke=\"#bbbbbb\" fill=\"none\">\n";
  for (int r = 0; r < kSeatRows; ++r) {
    for (int c = 0; c < kSeatCols; ++c) {
      os << "    <rect x=\"" << Fixed(margin / 2 + c * style.cell, 1)
         << "\" y=\"" << Fixed(margin / 2 + r * style.cell, 1) << "\" width=\""
         << Fixed(style.cell, 1) << "\" height=\"" << Fixed(style.cell, 1)
         << "\"/>\n";
    }
  }
  os << "  </g>\n  <g id=\"labels\" font-family=\"sans-serif\" font-size=\"12\" "
        "fill=\"#666666\">\n";
  for (int r = 0; r < kSeatRows; ++r) {
    for (int c = 0; c < kSeatCols; ++c) {
      os << "    <text x=\"" << Fixed(margin / 2 + c * style.cell + 4, 1)
         << "\" y=\"" << Fixed(margin / 2 + r * style.cell + 14, 1) << "\">"
         << SeatLabel(r, c) << "</text>\n";
    }
  }
  os << "  </g>\n  <g id=\"dwell\" stroke=\"black\">\n";
  for (int r = 0; r < kSeatRows; ++r) {
    for (int c = 0; c < kSeatCols; ++c) {
      const std::string label = SeatLabel(r, c);
      const auto it = dwell.find(label);
      if (it == dwell.end()) continue;
      const double radius = HeatmapRadius(it->second.dwell_ms, max_dwell, style);
      const int g = HeatmapGray(it->second.visits, max_visits, style);
      char fill[8];
      std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", g, g, g);
      os << "    <circle data-seat=\"" << label << "\" data-dwell-ms=\""
         << it->second.dwell_ms << "\" data-visits=\"" << it->second.visits
         << "\" cx=\"" << Fixed(margin / 2 + (c + 0.5) * style.cell, 1)
         << "\" cy=\"" << Fixed(margin / 2 + (r + 0.5) * style.cell, 1)
         << "\" r=\"" << Fixed(radius, 3) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  os << "  </g>\n</svg>\n";
  return os.str();
}

}  // namespace auralab
