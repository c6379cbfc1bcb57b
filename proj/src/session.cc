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


#include "auralab/session.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace auralab {
namespace {

using nlohmann::json;

constexpr std::array<Attribute, 4> kAttributes = {{
    {AttributeId::kBasicAudioQuality, "basic_audio_quality",
     "Basic Audio Quality", "0", "100",
     "Global attribute used to judge all detected differences between the "
     "reference and the object."},
    {AttributeId::kLocalizability, "localizability", "Localizability",
     "More difficult", "Easier",
     "Attribute that correlates with the perceived spatial extent of a "
     "source. Localizability is low when spatial extent and location of a "
     "sound source are difficult to estimate or appear diffuse. It is high "
     "if a sound source is clearly delimited."},
    {AttributeId::kSpatialQuality, "spatial_quality", "Spatial Quality",
     "Low Quality", "High Quality",
     "A measure of the ability of the item to acoustically describe the "
     "presented scene with respect to the reference. Takes into account all "
     "spatial characteristics, e.g., depth, width, spatial distribution, "
     "reverberation, spatialization, distance, envelopment, immersion."},
    {AttributeId::kTimbralQuality, "timbral_quality", "Timbral Quality",
     "Low Quality", "High Quality",
     "How accurately the item maintains the original harmonic content, tone "
     "color, and spectral balance of the sound with respect to the "
     "reference."},
}};

bool IsSafeId(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == '.';
  });
}

// Unbiased integer in [0, bound), identical on every standard library.
uint64_t Bounded(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

template <typename T>
bool ParseNumber(const std::string& s, T& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::span<const Attribute> Attributes() { return kAttributes; }

const Attribute& GetAttribute(AttributeId id) {
  return kAttributes[static_cast<size_t>(id)];
}

const Attribute* FindAttribute(std::string_view key) {
  for (const auto& a : kAttributes) {
    if (a.key == key) return &a;
  }
  return nullptr;
}

std::string_view ToString(SessionErrc code) {
  switch (code) {
    case SessionErrc::kInvalidConfig: return "InvalidConfig";
    case SessionErrc::kUnknownLabel: return "UnknownLabel";
    case SessionErrc::kUnknownAttribute: return "UnknownAttribute";
    case SessionErrc::kOutOfRange: return "OutOfRange";
    case SessionErrc::kWrongPhase: return "WrongPhase";
    case SessionErrc::kIncomplete: return "Incomplete";
    case SessionErrc::kNotFinished: return "NotFinished";
    case SessionErrc::kPersistFailure: return "PersistFailure";
  }
  return "Unknown";
}

std::string_view ToString(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::kFamiliarization: return "familiarization";
    case SessionPhase::kRating: return "rating";
    case SessionPhase::kDone: return "done";
  }
  return "unknown";
}

void ValidateSessionConfig(const SessionConfig& config) {
  auto fail = [](const std::string& what) {
    throw SessionError(SessionErrc::kInvalidConfig, what);
  };
  if (!IsSafeId(config.assessor_id)) {
    fail("assessor id must be 1-64 characters of [A-Za-z0-9_.-]");
  }
  if (!IsSafeId(config.session_id)) {
    fail("session id must be 1-64 characters of [A-Za-z0-9_.-]");
  }
  if (config.trials.empty()) fail("at least one trial is required");
  if (config.conditions_under_test.size() < 2) {
    fail("at least two conditions under test are required");
  }
  std::set<ConditionId> seen;
  int hidden = 0;
  for (const auto& c : config.conditions_under_test) {
    if (!seen.insert(c).second) fail("duplicate condition '" + c.id() + "'");
    if (c.kind() == ConditionId::Kind::kHiddenReference) ++hidden;
    if (c.kind() == ConditionId::Kind::kReference) {
      fail("the explicit reference is not a condition under test");
    }
  }
  if (hidden != 1) fail("conditions must include hidden_reference exactly once");
  if (config.attributes.empty()) fail("at least one attribute is required");
  std::set<AttributeId> attrs(config.attributes.begin(), config.attributes.end());
  if (attrs.size() != config.attributes.size()) fail("duplicate attribute");
  if (config.rating_threshold < kRatingMin || config.rating_threshold > kRatingMax) {
    fail("rating threshold must be in [0, 100]");
  }
  if (!(config.exclusion_fraction >= 0.0 && config.exclusion_fraction <= 1.0)) {
    fail("exclusion fraction must be in [0, 1]");
  }
}

std::string StimulusLabel(size_t index) {
  std::string label;
  ++index;
  while (index > 0) {
    --index;
    label.insert(label.begin(), char('A' + index % 26));
    index /= 26;
  }
  return label;
}

std::vector<LabelMap> GenerateLabelMaps(const SessionConfig& config) {
  std::mt19937_64 rng(config.rng_seed);
  std::vector<LabelMap> maps;
  for (size_t t = 0; t < config.trials.size(); ++t) {
    std::vector<ConditionId> order = config.conditions_under_test;
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[Bounded(rng, i + 1)]);
    }
    LabelMap map;
    for (size_t i = 0; i < order.size(); ++i) map[StimulusLabel(i)] = order[i];
    maps.push_back(std::move(map));
  }
  return maps;
}

std::string ResultsToCsv(const std::vector<RatingRecord>& ratings) {
  std::ostringstream os;
  os << kResultsCsvHeader << '\n';
  for (const auto& r : ratings) {
    os << r.assessor << ',' << r.trial << ',' << GetAttribute(r.attribute).key
       << ',' << r.condition.id() << ',' << r.label << ',' << r.value << ','
       << r.unix_ms << '\n';
  }
  return os.str();
}

std::vector<RatingRecord> ParseResultsCsv(std::string_view text) {
  std::vector<RatingRecord> out;
  size_t line_no = 0;
  size_t pos = 0;
  auto fail = [&](const std::string& what) {
    throw SessionError(SessionErrc::kPersistFailure,
                       "results line " + std::to_string(line_no) + ": " + what);
  };
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (line_no == 1) {
      std::string header(line);
      if (!header.empty() && header.back() == '\r') header.pop_back();
      if (header != kResultsCsvHeader) fail("unexpected header");
      continue;
    }
    if (fields.size() != 7) fail("expected 7 fields");
    RatingRecord r;
    r.assessor = fields[0];
    if (!ParseNumber(fields[1], r.trial) || r.trial < 1) fail("bad trial");
    const Attribute* a = FindAttribute(fields[2]);
    if (a == nullptr) fail("unknown attribute '" + fields[2] + "'");
    r.attribute = a->id;
    try {
      r.condition = ConditionId::Parse(fields[3]);
    } catch (const ArirError&) {
      fail("bad condition '" + fields[3] + "'");
    }
    r.label = fields[4];
    if (!ParseNumber(fields[5], r.value) || r.value < kRatingMin ||
        r.value > kRatingMax) {
      fail("bad value");
    }
    if (!ParseNumber(fields[6], r.unix_ms)) fail("bad timestamp");
    out.push_back(std::move(r));
  }
  if (line_no == 0) {
    throw SessionError(SessionErrc::kPersistFailure, "empty results file");
  }
  return out;
}

std::vector<RatingRecord> ReadResultsCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SessionError(SessionErrc::kPersistFailure,
                       "cannot read " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseResultsCsv(ss.str());
}

std::string ResultsStem(const std::string& assessor, const std::string& session,
                        bool aborted) {
  return "results_" + assessor + "_" + session + (aborted ? ".aborted" : "");
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw SessionError(SessionErrc::kPersistFailure,
                         "cannot write " + tmp.string());
    }
    f.write(text.data(), std::streamsize(text.size()));
    f.flush();
    if (!f) {
      throw SessionError(SessionErrc::kPersistFailure,
                         "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw SessionError(SessionErrc::kPersistFailure,
                       "rename to " + path.string() + ": " + ec.message());
  }
}

int64_t SystemUnixMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Session::Session(SessionConfig config, UnixClock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  ValidateSessionConfig(config_);
  label_maps_ = GenerateLabelMaps(config_);
  ratings_.resize(config_.trials.size());
  started_ = phase_started_ = clock_();
}

const std::string& Session::trial_source() const {
  return config_.trials[std::min<size_t>(trial_, config_.trials.size() - 1)];
}

std::vector<std::string> Session::labels() const {
  std::vector<std::string> out;
  const auto& map = label_maps_[std::min<size_t>(trial_, label_maps_.size() - 1)];
  for (const auto& [label, cond] : map) out.push_back(label);
  return out;
}

ConditionId Session::ResolveStimulus(std::string_view label) const {
  if (phase_ == SessionPhase::kDone) {
    throw SessionError(SessionErrc::kWrongPhase, "session is finished");
  }
  if (label == kReferenceLabel) return ConditionId::Reference();
  const auto& map = label_maps_[trial_];
  const auto it = map.find(std::string(label));
  if (it == map.end()) {
    throw SessionError(SessionErrc::kUnknownLabel,
                       "'" + std::string(label) + "' is not a stimulus label");
  }
  return it->second;
}

void Session::BeginRating() {
  if (phase_ != SessionPhase::kFamiliarization) {
    throw SessionError(SessionErrc::kWrongPhase,
                       "rating already started (phase " +
                           std::string(ToString(phase_)) + ")");
  }
  const int64_t now = clock_();
  familiarization_ms_ = now - phase_started_;
  phase_started_ = now;
  phase_ = SessionPhase::kRating;
  trial_ = 0;
}

void Session::RequireRating() const {
  if (phase_ != SessionPhase::kRating) {
    throw SessionError(SessionErrc::kWrongPhase,
                       "no trial in progress (phase " +
                           std::string(ToString(phase_)) + ")");
  }
}

void Session::SubmitRating(std::string_view attribute, std::string_view label,
                           int value) {
  RequireRating();
  const Attribute* a = FindAttribute(attribute);
  if (a == nullptr ||
      std::find(config_.attributes.begin(), config_.attributes.end(), a->id) ==
          config_.attributes.end()) {
    throw SessionError(SessionErrc::kUnknownAttribute,
                       "'" + std::string(attribute) + "'");
  }
  if (!label_maps_[trial_].count(std::string(label))) {
    throw SessionError(SessionErrc::kUnknownLabel,
                       "'" + std::string(label) + "' cannot be rated");
  }
  if (value < kRatingMin || value > kRatingMax) {
    throw SessionError(SessionErrc::kOutOfRange,
                       std::to_string(value) + " outside [0, 100]");
  }
  ratings_[trial_][{a->id, std::string(label)}] = Stored{value, clock_()};
  attribute_ = a->id;
}

std::optional<int> Session::Rating(AttributeId attribute,
                                   std::string_view label) const {
  if (phase_ == SessionPhase::kDone) return std::nullopt;
  const auto& trial = ratings_[trial_];
  const auto it = trial.find({attribute, std::string(label)});
  if (it == trial.end()) return std::nullopt;
  return it->second.value;
}

std::vector<RatingCell> Session::MissingCells() const {
  std::vector<RatingCell> missing;
  if (phase_ != SessionPhase::kRating) return missing;
  for (AttributeId a : config_.attributes) {
    for (const auto& [label, cond] : label_maps_[trial_]) {
      if (!ratings_[trial_].count({a, label})) missing.push_back({a, label});
    }
  }
  return missing;
}

void Session::CompleteTrial() {
  RequireRating();
  auto missing = MissingCells();
  if (!missing.empty()) {
    std::string list;
    for (const auto& cell : missing) {
      if (!list.empty()) list += ", ";
      list += std::string(GetAttribute(cell.attribute).key) + "/" + cell.label;
    }
    throw SessionError(SessionErrc::kIncomplete,
                       std::to_string(missing.size()) + " unrated: " + list,
                       std::move(missing));
  }
  const int64_t now = clock_();
  trial_ms_.push_back(now - phase_started_);
  phase_started_ = now;
  if (trial_ + 1 < trial_count()) {
    ++trial_;
  } else {
    phase_ = SessionPhase::kDone;
  }
}

SessionResult Session::BuildResult(bool aborted, int64_t finished) const {
  SessionResult r;
  r.assessor_id = config_.assessor_id;
  r.session_id = config_.session_id;
  r.aborted = aborted;
  r.started_unix_ms = started_;
  r.finished_unix_ms = finished;
  r.familiarization_ms = familiarization_ms_;
  r.trial_ms = trial_ms_;
  r.trial_sources = config_.trials;
  r.label_maps = label_maps_;
  for (size_t t = 0; t < ratings_.size(); ++t) {
    for (AttributeId a : config_.attributes) {
      for (const auto& [label, cond] : label_maps_[t]) {
        const auto it = ratings_[t].find({a, label});
        if (it == ratings_[t].end()) continue;
        r.ratings.push_back(RatingRecord{config_.assessor_id, int(t) + 1, a,
                                         cond, label, it->second.value,
                                         it->second.unix_ms});
      }
    }
  }
  return r;
}

void Session::Persist(const std::filesystem::path& dir,
                      const SessionResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string stem =
      ResultsStem(result.assessor_id, result.session_id, result.aborted);
  json meta;
  meta["assessor"] = result.assessor_id;
  meta["session"] = result.session_id;
  meta["status"] = result.aborted ? "aborted" : "complete";
  meta["started_unix_ms"] = result.started_unix_ms;
  meta["finished_unix_ms"] = result.finished_unix_ms;
  meta["familiarization_ms"] = result.familiarization_ms;
  meta["trial_ms"] = result.trial_ms;
  meta["telemetry"] = result.telemetry_file;
  meta["results"] = stem + ".csv";
  json trials = json::array();
  for (size_t t = 0; t < result.label_maps.size(); ++t) {
    json labels = json::object();
    for (const auto& [label, cond] : result.label_maps[t]) labels[label] = cond.id();
    trials.push_back({{"trial", t + 1},
                      {"source", result.trial_sources[t]},
                      {"labels", labels}});
  }
  meta["trials"] = trials;
  WriteFileAtomic(dir / (stem + ".csv"), ResultsToCsv(result.ratings));
  WriteFileAtomic(dir / (stem + ".json"),
                  meta.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");
}

SessionResult Session::Finalize(const std::filesystem::path& dir,
                                const std::string& telemetry_file) {
  if (phase_ != SessionPhase::kDone) {
    throw SessionError(SessionErrc::kNotFinished,
                       "trial " + std::to_string(trial_ + 1) + " of " +
                           std::to_string(trial_count()) + " is not complete");
  }
  if (!finalized_) {
    finalized_ = BuildResult(false, clock_());
    finalized_->telemetry_file = telemetry_file;
  }
  Persist(dir, *finalized_);
  return *finalized_;
}

SessionResult Session::Abort(const std::filesystem::path& dir,
                             const std::string& telemetry_file) {
  if (finalized_) return *finalized_;
  SessionResult result = BuildResult(true, clock_());
  result.telemetry_file = telemetry_file;
  Persist(dir, result);
  return result;
}

}  // namespace auralab
