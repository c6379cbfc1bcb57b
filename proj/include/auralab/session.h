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


// MUSHRA session state machine: familiarization, rated trials with
// per-trial double-blind labels, and result persistence.

#ifndef AURALAB_SESSION_H_
#define AURALAB_SESSION_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "auralab/arir_store.h"

namespace auralab {

enum class AttributeId {
  kBasicAudioQuality,
  kLocalizability,
  kSpatialQuality,
  kTimbralQuality,
};

struct Attribute {
  AttributeId id;
  std::string_view key;  // wire / file id, e.g. "basic_audio_quality"
  std::string_view name;
  std::string_view low_label;
  std::string_view high_label;
  std::string_view description;
};

inline constexpr int kRatingMin = 0;
inline constexpr int kRatingMax = 100;

std::span<const Attribute> Attributes();
const Attribute& GetAttribute(AttributeId id);
// nullptr for unknown keys.
const Attribute* FindAttribute(std::string_view key);

// Label of the explicit reference; never rated.
inline constexpr std::string_view kReferenceLabel = "ref";

enum class SessionErrc {
  kInvalidConfig,
  kUnknownLabel,
  kUnknownAttribute,
  kOutOfRange,
  kWrongPhase,
  kIncomplete,
  kNotFinished,
  kPersistFailure,
};

std::string_view ToString(SessionErrc code);

struct RatingCell {
  AttributeId attribute;
  std::string label;
  bool operator==(const RatingCell&) const = default;
};

class SessionError : public std::runtime_error {
 public:
  SessionError(SessionErrc code, const std::string& what,
               std::vector<RatingCell> missing = {})
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code),
        missing_(std::move(missing)) {}
  SessionErrc code() const { return code_; }
  // Unrated cells for kIncomplete.
  const std::vector<RatingCell>& missing() const { return missing_; }

 private:
  SessionErrc code_;
  std::vector<RatingCell> missing_;
};

struct SessionConfig {
  std::string assessor_id = "assessor";
  std::string session_id = "session";
  // One source-sample id per trial.
  std::vector<std::string> trials;
  std::vector<ConditionId> conditions_under_test = {
      ConditionId::HiddenReference(), ConditionId::NonParametric(),
      ConditionId::LowpassAnchor(), ConditionId::Parametric()};
  std::vector<AttributeId> attributes = {
      AttributeId::kBasicAudioQuality, AttributeId::kLocalizability,
      AttributeId::kSpatialQuality, AttributeId::kTimbralQuality};
  uint64_t rng_seed = 0;
  int rating_threshold = 90;
  double exclusion_fraction = 0.15;
};

// Throws kInvalidConfig.
void ValidateSessionConfig(const SessionConfig& config);

// label ("A", "B", ...) -> condition
using LabelMap = std::map<std::string, ConditionId>;

// One uniformly random bijection per trial, fully determined by the seed.
std::vector<LabelMap> GenerateLabelMaps(const SessionConfig& config);

// "A", "B", ..., "Z", "AA", ...
std::string StimulusLabel(size_t index);

struct RatingRecord {
  std::string assessor;
  int trial = 0;  // 1-based
  AttributeId attribute = AttributeId::kBasicAudioQuality;
  ConditionId condition;
  std::string label;
  int value = 0;
  int64_t unix_ms = 0;

  bool operator==(const RatingRecord&) const = default;
};

struct SessionResult {
  std::string assessor_id;
  std::string session_id;
  bool aborted = false;
  int64_t started_unix_ms = 0;
  int64_t finished_unix_ms = 0;
  int64_t familiarization_ms = 0;
  std::vector<int64_t> trial_ms;
  std::vector<std::string> trial_sources;
  std::vector<LabelMap> label_maps;
  std::vector<RatingRecord> ratings;
  std::string telemetry_file;
};

inline constexpr std::string_view kResultsCsvHeader =
    "assessor,trial,attribute,condition,label,value,unix_ms";

std::string ResultsToCsv(const std::vector<RatingRecord>& ratings);
// Throws SessionError(kPersistFailure) on malformed input.
std::vector<RatingRecord> ParseResultsCsv(std::string_view text);
std::vector<RatingRecord> ReadResultsCsv(const std::filesystem::path& path);

// "results_<assessor>_<session>" (+ ".aborted" for partial results).
std::string ResultsStem(const std::string& assessor, const std::string& session,
                        bool aborted);

// Writes text to path through a sibling temp file and rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view text);

enum class SessionPhase { kFamiliarization, kRating, kDone };

std::string_view ToString(SessionPhase phase);

using UnixClock = std::function<int64_t()>;
int64_t SystemUnixMs();

class Session {
 public:
  // create_session. Label maps for every trial are drawn here.
  explicit Session(SessionConfig config, UnixClock clock = SystemUnixMs);

  const SessionConfig& config() const { return config_; }
  SessionPhase phase() const { return phase_; }
  // 0-based. During familiarization this is 0 (free play over trial 0).
  int trial_index() const { return trial_; }
  int trial_count() const { return int(config_.trials.size()); }
  const std::string& trial_source() const;

  // Stimulus labels of the current trial in order, without "ref".
  std::vector<std::string> labels() const;
  std::optional<AttributeId> current_attribute() const { return attribute_; }
  void set_current_attribute(AttributeId id) { attribute_ = id; }

  // Label ("ref" or a trial label) to the condition it plays. Throws
  // kUnknownLabel; kWrongPhase once the session is done.
  ConditionId ResolveStimulus(std::string_view label) const;

  // Familiarization -> rating of trial 0. kWrongPhase otherwise.
  void BeginRating();
  // submit_rating. Overwrites until the trial completes.
  void SubmitRating(std::string_view attribute, std::string_view label,
                    int value);
  std::optional<int> Rating(AttributeId attribute, std::string_view label) const;
  std::vector<RatingCell> MissingCells() const;
  // complete_trial. Throws kIncomplete listing every unrated cell. Advances
  // to the next trial, or to kDone after the last.
  void CompleteTrial();

  // finalize_session: writes <dir>/<stem>.csv and <stem>.json atomically.
  // Idempotent. kNotFinished unless phase is kDone.
  SessionResult Finalize(const std::filesystem::path& dir,
                         const std::string& telemetry_file = "");
  // Persists whatever has been rated so far, marked aborted.
  SessionResult Abort(const std::filesystem::path& dir,
                      const std::string& telemetry_file = "");
  bool finalized() const { return finalized_.has_value(); }

 private:
  struct Stored {
    int value;
    int64_t unix_ms;
  };

  SessionResult BuildResult(bool aborted, int64_t finished) const;
  void Persist(const std::filesystem::path& dir, const SessionResult& result);
  void RequireRating() const;

  SessionConfig config_;
  UnixClock clock_;
  std::vector<LabelMap> label_maps_;
  SessionPhase phase_ = SessionPhase::kFamiliarization;
  int trial_ = 0;
  std::optional<AttributeId> attribute_;
  int64_t started_ = 0;
  int64_t phase_started_ = 0;
  int64_t familiarization_ms_ = 0;
  std::vector<int64_t> trial_ms_;
  // [trial][(attribute, label)]
  std::vector<std::map<std::pair<AttributeId, std::string>, Stored>> ratings_;
  std::optional<SessionResult> finalized_;
};

}  // namespace auralab

#endif  // AURALAB_SESSION_H_
