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

#include "auralab/arir_store.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "auralab/wav.h"
#include "json.hpp"

namespace auralab {
namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& what) {
  throw ArirError(ArirErrc::kMalformedManifest, what);
}

Vec3 ParseVec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) Malformed(where + ": expected [x, y, z]");
  Vec3 v;
  for (size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) Malformed(where + ": non-numeric coordinate");
    v[i] = j[i].get<double>();
  }
  return v;
}

struct KindName {
  ConditionId::Kind kind;
  const char* id;
};
constexpr KindName kKindNames[] = {
    {ConditionId::Kind::kReference, "reference"},
    {ConditionId::Kind::kHiddenReference, "hidden_reference"},
    {ConditionId::Kind::kNonParametric, "non_parametric"},
    {ConditionId::Kind::kLowpassAnchor, "lowpass_anchor"},
    {ConditionId::Kind::kParametric, "parametric"},
};

}  // namespace

std::string_view ToString(ArirErrc code) {
  switch (code) {
    case ArirErrc::kMissingFile: return "MissingFile";
    case ArirErrc::kChannelCountMismatch: return "ChannelCountMismatch";
    case ArirErrc::kSampleRateMismatch: return "SampleRateMismatch";
    case ArirErrc::kNonFiniteSample: return "NonFiniteSample";
    case ArirErrc::kMalformedManifest: return "MalformedManifest";
    case ArirErrc::kKeyNotFound: return "KeyNotFound";
    case ArirErrc::kNotMono: return "NotMono";
    case ArirErrc::kUnreadableFile: return "UnreadableFile";
    case ArirErrc::kDurationOutOfRange: return "DurationOutOfRange";
  }
  return "Unknown";
}

std::string_view ToString(AmbisonicConvention convention) {
  return convention == AmbisonicConvention::kAcnSn3d ? "ACN/SN3D" : "ACN/N3D";
}

AmbisonicConvention ParseConvention(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return char(std::toupper(c)); });
  if (t == "ACN/SN3D" || t == "AMBIX" || t == "SN3D") {
    return AmbisonicConvention::kAcnSn3d;
  }
  if (t == "ACN/N3D" || t == "N3D") return AmbisonicConvention::kAcnN3d;
  Malformed("unknown ambisonic convention '" + std::string(text) + "'");
}

bool ParseSeatLabel(std::string_view label, int& row, int& col) {
  if (label.size() != 2) return false;
  if (label[0] < 'A' || label[0] >= 'A' + kSeatRows) return false;
  if (label[1] < '1' || label[1] >= '1' + kSeatCols) return false;
  row = label[0] - 'A';
  col = label[1] - '1';
  return true;
}

std::string SeatLabel(int row, int col) {
  return {char('A' + row), char('1' + col)};
}

ConditionId::ConditionId(Kind kind) : kind_(kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) id_ = k.id;
  }
  if (id_.empty()) Malformed("custom conditions need an id");
}

ConditionId ConditionId::Parse(std::string_view id) {
  for (const auto& k : kKindNames) {
    if (id == k.id) return ConditionId(k.kind);
  }
  if (id.empty() || id.size() > 64 ||
      !std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
      })) {
    Malformed("invalid condition id '" + std::string(id) + "'");
  }
  ConditionId out;
  out.kind_ = Kind::kCustom;
  out.id_ = std::string(id);
  return out;
}

const SeatId& Manifest::Seat(std::string_view label) const {
  for (const auto& s : seats) {
    if (s.label == label) return s;
  }
  throw ArirError(ArirErrc::kKeyNotFound,
                  "seat '" + std::string(label) + "' not in layout");
}

bool Manifest::HasSeat(std::string_view label) const {
  return std::any_of(seats.begin(), seats.end(),
                     [&](const SeatId& s) { return s.label == label; });
}

Manifest ParseManifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Malformed(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) Malformed("manifest root must be an object");

  Manifest m;
  try {
    m.room = j.value("room", std::string("room"));
    if (!j.contains("sample_rate") || !j["sample_rate"].is_number_integer()) {
      Malformed("sample_rate missing");
    }
    m.config.sample_rate = j["sample_rate"].get<int>();
    if (m.config.sample_rate <= 0) Malformed("sample_rate must be positive");
    m.config.order = j.value("order", 2);
    if (m.config.order < 1 || m.config.order > 3) {
      Malformed("order must be 1..3");
    }
    m.config.convention =
        ParseConvention(j.value("convention", std::string("ACN/SN3D")));

    if (!j.contains("seats") || !j["seats"].is_array()) {
      Malformed("seats missing");
    }
    std::set<std::string> labels;
    for (const auto& s : j["seats"]) {
      SeatId seat;
      seat.label = s.at("label").get<std::string>();
      if (!ParseSeatLabel(seat.label, seat.row, seat.col)) {
        Malformed("bad seat label '" + seat.label + "'");
      }
      if (!labels.insert(seat.label).second) {
        Malformed("duplicate seat '" + seat.label + "'");
      }
      seat.position = ParseVec3(s.at("position"), "seat " + seat.label);
      m.seats.push_back(seat);
    }
    if (m.seats.size() != size_t(kSeatCount)) {
      Malformed("layout must declare exactly 25 seats, found " +
                std::to_string(m.seats.size()));
    }
    std::sort(m.seats.begin(), m.seats.end(), [](const auto& a, const auto& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });

    if (!j.contains("sources") || !j["sources"].is_array() ||
        j["sources"].empty()) {
      Malformed("at least one source required");
    }
    for (const auto& s : j["sources"]) {
      SourceId src;
      src.index = int(m.sources.size());
      src.position = ParseVec3(s.at("position"), "source");
      for (const auto& other : m.sources) {
        if (other.position == src.position) Malformed("duplicate source position");
      }
      m.sources.push_back(src);
    }

    if (!j.contains("conditions") || !j["conditions"].is_array() ||
        j["conditions"].empty()) {
      Malformed("at least one condition required");
    }
    std::set<std::string> ids;
    for (const auto& c : j["conditions"]) {
      ConditionEntry entry;
      entry.id = ConditionId::Parse(c.at("id").get<std::string>());
      if (entry.id.is_virtual()) {
        Malformed("condition '" + entry.id.id() +
                  "' is derived from the reference and cannot be stored");
      }
      if (!ids.insert(entry.id.id()).second) {
        Malformed("duplicate condition '" + entry.id.id() + "'");
      }
      entry.directory = c.value("directory", entry.id.id());
      if (entry.directory.empty()) Malformed("empty condition directory");
      if (c.contains("seats")) {
        for (const auto& s : c["seats"]) {
          auto label = s.get<std::string>();
          if (!labels.count(label)) Malformed("unknown seat '" + label + "'");
          entry.seats.push_back(label);
        }
      } else {
        for (const auto& s : m.seats) entry.seats.push_back(s.label);
      }
      m.conditions.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    Malformed(std::string("manifest field error: ") + e.what());
  }
  return m;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ArirError(ArirErrc::kMissingFile, "manifest " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseManifest(ss.str());
}

std::string ManifestToJson(const Manifest& m) {
  json j;
  j["room"] = m.room;
  j["sample_rate"] = m.config.sample_rate;
  j["order"] = m.config.order;
  j["convention"] = std::string(ToString(m.config.convention));
  j["seats"] = json::array();
  for (const auto& s : m.seats) {
    j["seats"].push_back({{"label", s.label}, {"position", s.position}});
  }
  j["sources"] = json::array();
  for (const auto& s : m.sources) {
    j["sources"].push_back({{"position", s.position}});
  }
  j["conditions"] = json::array();
  for (const auto& c : m.conditions) {
    j["conditions"].push_back(
        {{"id", c.id.id()}, {"directory", c.directory}, {"seats", c.seats}});
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::filesystem::path IrFilePath(const std::filesystem::path& root,
                                 const ConditionEntry& condition,
                                 std::string_view seat_label, int source) {
  return root / condition.directory /
         (std::string(seat_label) + "_src" + std::to_string(source) + ".wav");
}

ArirSet::ArirSet(Manifest manifest, std::map<Key, MultichannelIr> rirs)
    : manifest_(std::move(manifest)), rirs_(std::move(rirs)) {
  for (const auto& [key, ir] : rirs_) {
    max_length_ = std::max(max_length_, ir.length());
  }
}

const MultichannelIr& ArirSet::Get(const ConditionId& condition,
                                   std::string_view seat, int source) const {
  auto it = rirs_.find(Key{condition.storage(), std::string(seat), source});
  if (it == rirs_.end()) {
    throw ArirError(ArirErrc::kKeyNotFound,
                    "(" + condition.id() + ", " + std::string(seat) +
                        ", src" + std::to_string(source) + ")");
  }
  return it->second;
}

bool ArirSet::Contains(const ConditionId& condition, std::string_view seat,
                       int source) const {
  return rirs_.count(Key{condition.storage(), std::string(seat), source}) > 0;
}

bool ArirSet::HasCondition(const ConditionId& condition) const {
  const ConditionId stored = condition.storage();
  return std::any_of(
      manifest_.conditions.begin(), manifest_.conditions.end(),
      [&](const ConditionEntry& c) { return c.id == stored; });
}

std::vector<ConditionId> ArirSet::StoredConditions() const {
  std::vector<ConditionId> out;
  for (const auto& c : manifest_.conditions) out.push_back(c.id);
  return out;
}

ArirSet LoadArirSet(const std::filesystem::path& root,
                    const std::filesystem::path& manifest_path) {
  Manifest manifest = LoadManifest(manifest_path);
  const int expected_channels = manifest.config.channel_count();
  std::map<ArirSet::Key, MultichannelIr> rirs;
  for (const auto& cond : manifest.conditions) {
    for (const auto& seat : cond.seats) {
      for (const auto& src : manifest.sources) {
        auto path = IrFilePath(root, cond, seat, src.index);
        if (!std::filesystem::exists(path)) {
          throw ArirError(ArirErrc::kMissingFile,
                          "(" + cond.id.id() + ", " + seat + ", src" +
                              std::to_string(src.index) + ") " +
                              path.string());
        }
        WavData wav;
        try {
          wav = ReadWav(path);
        } catch (const WavError& e) {
          throw ArirError(ArirErrc::kUnreadableFile, e.what());
        }
        if (int(wav.num_channels()) != expected_channels) {
          throw ArirError(ArirErrc::kChannelCountMismatch,
                          path.string() + ": expected " +
                              std::to_string(expected_channels) + ", found " +
                              std::to_string(wav.num_channels()));
        }
        if (wav.sample_rate != manifest.config.sample_rate) {
          throw ArirError(ArirErrc::kSampleRateMismatch,
                          path.string() + ": " +
                              std::to_string(wav.sample_rate) + " Hz, manifest " +
                              std::to_string(manifest.config.sample_rate));
        }
        if (wav.num_frames() == 0) {
          throw ArirError(ArirErrc::kUnreadableFile, path.string() + ": empty");
        }
        for (const auto& ch : wav.channels) {
          for (size_t n = 0; n < ch.size(); ++n) {
            if (!std::isfinite(ch[n])) {
              throw ArirError(ArirErrc::kNonFiniteSample,
                              path.string() + " at index " +
                                  std::to_string(n));
            }
          }
        }
        rirs.emplace(ArirSet::Key{cond.id, seat, src.index},
                     MultichannelIr{std::move(wav.channels)});
      }
    }
  }
  return ArirSet(std::move(manifest), std::move(rirs));
}

void WriteArirSet(const std::filesystem::path& root, const Manifest& manifest,
                  const std::map<ArirSet::Key, MultichannelIr>& rirs) {
  std::filesystem::create_directories(root);
  {
    std::ofstream out(root / "manifest.json");
    out << ManifestToJson(manifest) << "\n";
  }
  for (const auto& cond : manifest.conditions) {
    std::filesystem::create_directories(root / cond.directory);
  }
  for (const auto& [key, ir] : rirs) {
    auto it = std::find_if(
        manifest.conditions.begin(), manifest.conditions.end(),
        [&](const ConditionEntry& c) { return c.id == key.condition; });
    if (it == manifest.conditions.end()) {
      Malformed("entry for undeclared condition '" + key.condition.id() + "'");
    }
    WavData wav;
    wav.sample_rate = manifest.config.sample_rate;
    wav.channels = ir.channels;
    WriteWavFloat(IrFilePath(root, *it, key.seat, key.source), wav);
  }
}

SourceSample LoadSourceSample(const std::filesystem::path& path,
                              int expected_rate) {
  WavData wav;
  try {
    wav = ReadWav(path);
  } catch (const WavError& e) {
    throw ArirError(ArirErrc::kUnreadableFile, e.what());
  }
  if (wav.num_channels() != 1) {
    throw ArirError(ArirErrc::kNotMono,
                    path.string() + " has " +
                        std::to_string(wav.num_channels()) + " channels");
  }
  if (wav.sample_rate != expected_rate) {
    throw ArirError(ArirErrc::kSampleRateMismatch,
                    path.string() + ": " + std::to_string(wav.sample_rate) +
                        " Hz, expected " + std::to_string(expected_rate));
  }
  SourceSample out;
  out.id = path.stem().string();
  out.sample_rate = wav.sample_rate;
  out.samples = std::move(wav.channels.front());
  for (size_t n = 0; n < out.samples.size(); ++n) {
    if (!std::isfinite(out.samples[n])) {
      throw ArirError(ArirErrc::kNonFiniteSample,
                      path.string() + " at index " + std::to_string(n));
    }
  }
  const double seconds = out.duration();
  if (seconds < kMinSourceSeconds || seconds > kMaxSourceSeconds) {
    throw ArirError(ArirErrc::kDurationOutOfRange,
                    path.string() + ": " + std::to_string(seconds) + " s");
  }
  return out;
}

}  // namespace auralab
