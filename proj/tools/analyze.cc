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
#include <iostream>

#include "auralab/analysis.h"
#include "auralab/session.h"
#include "auralab/telemetry.h"
#include "commands.h"

namespace auralab::cli {
namespace {

namespace fs = std::filesystem;

struct AnalyzeArgs {
  std::string config;
  std::vector<std::string> inputs;
  std::string out = ".";
  std::string manifest;
  std::optional<int> threshold;
  std::optional<double> exclusion_fraction;
  double confidence = 0.95;
  bool pooled = false;
};

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool IsResults(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.starts_with("results_") && EndsWith(name, ".csv") &&
         !EndsWith(name, ".aborted.csv");
}

bool IsTelemetry(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.starts_with("telemetry_") && EndsWith(name, ".jsonl");
}

int RunAnalyze(const AnalyzeArgs& a) {
  const auto config = LoadConfig(a.config, false);
  std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
  if (inputs.empty() && config) inputs.push_back(config->output_dir);
  if (inputs.empty()) throw UsageError("no input: pass --input or --config");

  std::vector<fs::path> results, telemetry;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> entries;
      for (const auto& e : fs::directory_iterator(in)) entries.push_back(e.path());
      std::sort(entries.begin(), entries.end());
      for (const auto& p : entries) {
        if (IsResults(p)) results.push_back(p);
        if (IsTelemetry(p)) telemetry.push_back(p);
      }
    } else if (fs::is_regular_file(in)) {
      (in.extension() == ".jsonl" ? telemetry : results).push_back(in);
    } else {
      throw UsageError("input not found: " + in.string());
    }
  }
  if (results.empty()) throw UsageError("no results_*.csv among the inputs");

  std::vector<RatingRecord> rows;
  for (const auto& p : results) {
    auto r = ReadResultsCsv(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto grouped = GroupByAssessor(rows);
  const int threshold =
      a.threshold.value_or(config ? config->session.rating_threshold : 90);
  const double fraction = a.exclusion_fraction.value_or(
      config ? config->session.exclusion_fraction : 0.15);
  const auto screening = ScreenAssessors(grouped, threshold, fraction);

  std::vector<AssessorRatings> included;
  for (size_t i = 0; i < grouped.size(); ++i) {
    if (!screening[i].excluded) included.push_back(grouped[i]);
  }
  AggregateOptions options;
  options.pooled = a.pooled;
  options.confidence = a.confidence;
  const auto cells = included.empty() ? std::vector<AggregateCell>{}
                                      : Aggregate(included, options);

  std::map<std::string, SeatDwell> dwell;
  for (const auto& p : telemetry) {
    for (const auto& [seat, d] : ComputeDwell(ReadTelemetry(p))) {
      dwell[seat].dwell_ms += d.dwell_ms;
      dwell[seat].visits += d.visits;
    }
  }
  std::optional<Manifest> manifest;
  if (!a.manifest.empty()) {
    manifest = LoadManifest(a.manifest);
  } else if (config && fs::is_regular_file(config->manifest)) {
    manifest = LoadManifest(config->manifest);
  }

  const fs::path out = a.out;
  fs::create_directories(out);
  WriteFileAtomic(out / "screening.csv", ScreeningToCsv(screening));
  WriteFileAtomic(out / "aggregate.csv", AggregateToCsv(cells));
  WriteFileAtomic(out / "heatmap.csv",
                  HeatmapToCsv(HeatmapTable(dwell, manifest ? &*manifest : nullptr)));
  WriteFileAtomic(out / "heatmap.svg", HeatmapToSvg(dwell));

  const size_t excluded = size_t(std::count_if(
      screening.begin(), screening.end(), [](const auto& s) { return s.excluded; }));
  std::cout << results.size() << " result files, " << grouped.size() << " assessors, "
            << excluded << " excluded, " << cells.size() << " aggregate cells, "
            << telemetry.size() << " telemetry logs; wrote " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

void AddAnalyze(CLI::App& app, Action& action) {
  auto args = std::make_shared<AnalyzeArgs>();
  CLI::App* cmd = app.add_subcommand(
      "analyze", "Screen assessors, aggregate ratings and build the seat heatmap");
  cmd->add_option("-c,--config", args->config, "Config file (default $AURALAB_CONFIG)");
  cmd->add_option("-i,--input", args->inputs,
                  "Results/telemetry files or directories (default: config output_dir)");
  cmd->add_option("-o,--out", args->out, "Output directory")->capture_default_str();
  cmd->add_option("--manifest", args->manifest, "Manifest for heatmap seat coordinates");
  cmd->add_option("--threshold", args->threshold, "Hidden-reference threshold")
      ->check(CLI::Range(0, 100));
  cmd->add_option("--exclusion-fraction", args->exclusion_fraction,
                  "Exclude when the below-threshold fraction exceeds this")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--confidence", args->confidence, "Confidence level")->capture_default_str()
      ->check(CLI::Range(0.5, 0.999999));
  cmd->add_flag("--pooled", args->pooled, "CI over all ratings, not per-assessor means");
  cmd->callback([args, &action] { action = [args] { return RunAnalyze(*args); }; });
}

}  // namespace auralab::cli
