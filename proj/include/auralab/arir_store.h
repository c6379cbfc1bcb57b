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

// Ambisonic room impulse response datasets: manifest parsing, loading,
// validation and keyed lookup, plus anechoic source samples.
//
// On-disk layout:
//
//   <root>/manifest.json
//   <root>/<condition directory>/<seat label>_src<k>.wav
//
// Every IR file is a (order+1)^2 channel WAV at the manifest sample rate.

#ifndef AURALAB_ARIR_STORE_H_
#define AURALAB_ARIR_STORE_H_

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace auralab {

enum class ArirErrc {
  kMissingFile,
  kChannelCountMismatch,
  kSampleRateMismatch,
  kNonFiniteSample,
  kMalformedManifest,
  kKeyNotFound,
  kNotMono,
  kUnreadableFile,
  kDurationOutOfRange,
};

std::string_view ToString(ArirErrc code);

class ArirError : public std::runtime_error {
 public:
  ArirError(ArirErrc code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}
  ArirErrc code() const { return code_; }

 private:
  ArirErrc code_;
};

using Vec3 = std::array<double, 3>;

enum class AmbisonicConvention { kAcnSn3d, kAcnN3d };

std::string_view ToString(AmbisonicConvention convention);
// Accepts "ACN/SN3D" (alias "ambix") and "ACN/N3D".
AmbisonicConvention ParseConvention(std::string_view text);

struct AmbisonicConfig {
  int order = 2;
  AmbisonicConvention convention = AmbisonicConvention::kAcnSn3d;
  int sample_rate = 48000;

  int channel_count() const { return (order + 1) * (order + 1); }
  bool operator==(const AmbisonicConfig&) const = default;
};

// One listening position on the 5 x 5 grid. Rows are lettered A..E, columns
// numbered 1..5, so "B3" is row 1, col 2.
struct SeatId {
  int row = 0;
  int col = 0;
  std::string label;
  Vec3 position{};

  bool operator==(const SeatId& other) const { return label == other.label; }
};

inline constexpr int kSeatRows = 5;
inline constexpr int kSeatCols = 5;
inline constexpr int kSeatCount = kSeatRows * kSeatCols;

// Parses "A1".."E5" into (row, col). Returns false on anything else.
bool ParseSeatLabel(std::string_view label, int& row, int& col);
std::string SeatLabel(int row, int col);

struct SourceId {
  int index = 0;
  Vec3 position{};
};

// A stimulus condition. The five MUSHRA roles have fixed ids; datasets may
// add further conditions under any lowercase [a-z0-9_] id.
class ConditionId {
 public:
  enum class Kind {
    kReference,
    kHiddenReference,
    kNonParametric,
    kLowpassAnchor,
    kParametric,
    kCustom,
  };

  ConditionId() : ConditionId(Kind::kReference) {}
  explicit ConditionId(Kind kind);

  // Throws ArirError(kMalformedManifest) on an invalid id.
  static ConditionId Parse(std::string_view id);

  static ConditionId Reference() { return ConditionId(Kind::kReference); }
  static ConditionId HiddenReference() {
    return ConditionId(Kind::kHiddenReference);
  }
  static ConditionId NonParametric() {
    return ConditionId(Kind::kNonParametric);
  }
  static ConditionId LowpassAnchor() {
    return ConditionId(Kind::kLowpassAnchor);
  }
  static ConditionId Parametric() { return ConditionId(Kind::kParametric); }

  Kind kind() const { return kind_; }
  const std::string& id() const { return id_; }

  // Hidden reference and low-pass anchor have no dataset of their own.
  bool is_virtual() const {
    return kind_ == Kind::kHiddenReference || kind_ == Kind::kLowpassAnchor;
  }
  // The dataset this condition reads IRs from.
  ConditionId storage() const {
    return is_virtual() ? Reference() : *this;
  }
  bool uses_anchor_filter() const { return kind_ == Kind::kLowpassAnchor; }

  bool operator==(const ConditionId& other) const { return id_ == other.id_; }
  auto operator<=>(const ConditionId& other) const {
    return id_ <=> other.id_;
  }

 private:
  Kind kind_;
  std::string id_;
};

// Channel-major multichannel impulse response, channels[c][n].
struct MultichannelIr {
  std::vector<std::vector<float>> channels;

  size_t num_channels() const { return channels.size(); }
  size_t length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  bool operator==(const MultichannelIr&) const = default;
};

struct ConditionEntry {
  ConditionId id;
  std::string directory;
  std::vector<std::string> seats;  // labels with data for this condition
};

struct Manifest {
  std::string room;
  AmbisonicConfig config;
  std::vector<SeatId> seats;  // always the full 25-seat grid, row-major
  std::vector<SourceId> sources;
  std::vector<ConditionEntry> conditions;

  const SeatId& Seat(std::string_view label) const;  // throws kKeyNotFound
  bool HasSeat(std::string_view label) const;
};

Manifest ParseManifest(std::string_view json_text);
Manifest LoadManifest(const std::filesystem::path& path);
std::string ManifestToJson(const Manifest& manifest);

std::filesystem::path IrFilePath(const std::filesystem::path& root,
                                 const ConditionEntry& condition,
                                 std::string_view seat_label, int source);

// Immutable after load; safe to share across threads.
class ArirSet {
 public:
  struct Key {
    ConditionId condition;
    std::string seat;
    int source = 0;
    auto operator<=>(const Key&) const = default;
  };

  ArirSet(Manifest manifest, std::map<Key, MultichannelIr> rirs);

  const AmbisonicConfig& config() const { return manifest_.config; }
  const Manifest& manifest() const { return manifest_; }
  size_t size() const { return rirs_.size(); }
  int num_sources() const { return int(manifest_.sources.size()); }
  size_t max_length() const { return max_length_; }

  // Virtual conditions resolve to the reference data. Throws kKeyNotFound.
  const MultichannelIr& Get(const ConditionId& condition,
                            std::string_view seat, int source) const;
  bool Contains(const ConditionId& condition, std::string_view seat,
                int source) const;
  // True if a condition (virtual or stored) can be rendered at all.
  bool HasCondition(const ConditionId& condition) const;
  std::vector<ConditionId> StoredConditions() const;

  const std::map<Key, MultichannelIr>& entries() const { return rirs_; }

  bool operator==(const ArirSet& other) const { return rirs_ == other.rirs_; }

 private:
  Manifest manifest_;
  std::map<Key, MultichannelIr> rirs_;
  size_t max_length_ = 0;
};

// Loads every (condition, seat, source) declared by the manifest under root.
ArirSet LoadArirSet(const std::filesystem::path& root,
                    const std::filesystem::path& manifest_path);

// Writes manifest.json plus one WAV per entry using the documented layout.
void WriteArirSet(const std::filesystem::path& root, const Manifest& manifest,
                  const std::map<ArirSet::Key, MultichannelIr>& rirs);

struct SourceSample {
  std::string id;
  std::vector<float> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

inline constexpr double kMinSourceSeconds = 5.0;
inline constexpr double kMaxSourceSeconds = 60.0;

// Id is the file stem. Rejects multichannel files, rate mismatches and
// durations outside [5, 60] s.
SourceSample LoadSourceSample(const std::filesystem::path& path,
                              int expected_rate);

}  // namespace auralab

#endif  // AURALAB_ARIR_STORE_H_
