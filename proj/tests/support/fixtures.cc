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


#include "support/fixtures.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unistd.h>

#include "auralab/wav.h"
#include "json.hpp"

namespace auralab::testing {

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (prefix + "_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Manifest MakeManifest(const FixtureSpec& spec) {
  Manifest m;
  m.room = "fixture_room";
  m.config.order = spec.order;
  m.config.convention = spec.convention;
  m.config.sample_rate = spec.sample_rate;
  for (int r = 0; r < kSeatRows; ++r) {
    for (int c = 0; c < kSeatCols; ++c) {
      SeatId seat;
      seat.row = r;
      seat.col = c;
      seat.label = SeatLabel(r, c);
      seat.position = {2.0 + 1.2 * r, -2.4 + 1.2 * c, 1.2};
      m.seats.push_back(seat);
    }
  }
  for (int s = 0; s < spec.sources; ++s) {
    m.sources.push_back({s, {0.5, -1.0 + 2.0 * s, 1.5}});
  }
  for (const auto& [id, dir] : spec.conditions) {
    ConditionEntry e;
    e.id = ConditionId::Parse(id);
    e.directory = dir;
    if (spec.seats.empty()) {
      for (const auto& s : m.seats) e.seats.push_back(s.label);
    } else {
      e.seats = spec.seats;
    }
    m.conditions.push_back(e);
  }
  return m;
}

MultichannelIr RandomArir(std::mt19937_64& rng, int channels, size_t length,
                          double decay_samples) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  MultichannelIr ir;
  ir.channels.assign(channels, std::vector<float>(length));
  for (int c = 0; c < channels; ++c) {
    const float gain = c == 0 ? 1.0f : 0.5f;
    for (size_t n = 0; n < length; ++n) {
      const double env =
          decay_samples > 0 ? std::exp(-double(n) / decay_samples) : 1.0;
      ir.channels[c][n] = float(gain * env * u(rng));
    }
  }
  return ir;
}

std::map<ArirSet::Key, MultichannelIr> RandomEntries(const Manifest& manifest,
                                                     std::mt19937_64& rng,
                                                     size_t length) {
  std::map<ArirSet::Key, MultichannelIr> out;
  for (const auto& c : manifest.conditions) {
    for (const auto& seat : c.seats) {
      for (const auto& s : manifest.sources) {
        out[{c.id, seat, s.index}] = RandomArir(
            rng, manifest.config.channel_count(), length, double(length) / 4);
      }
    }
  }
  return out;
}

std::filesystem::path WriteFixture(
    const std::filesystem::path& root, const Manifest& manifest,
    const std::map<ArirSet::Key, MultichannelIr>& entries) {
  WriteArirSet(root, manifest, entries);
  return root / "manifest.json";
}

SourceSample RandomSource(std::mt19937_64& rng, double seconds, int rate,
                          const std::string& id, double amplitude) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  SourceSample s;
  s.id = id;
  s.sample_rate = rate;
  s.samples.resize(size_t(std::llround(seconds * rate)));
  for (auto& v : s.samples) v = float(amplitude) * u(rng);
  return s;
}

void WriteMono(const std::filesystem::path& path, const std::vector<float>& x,
               int rate) {
  WavData wav;
  wav.sample_rate = rate;
  wav.channels = {x};
  WriteWavFloat(path, wav);
}

ServeFixture WriteServeFixture(const std::filesystem::path& root,
                               const ServeFixtureSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  FixtureSpec fs;
  fs.conditions = {{"reference", "reference"},
                   {"parametric", "parametric"},
                   {"non_parametric", "non_parametric"}};
  fs.sources = int(spec.source_ids.size());
  ServeFixture out;
  out.manifest = MakeManifest(fs);
  WriteFixture(root / "dataset", out.manifest,
               RandomEntries(out.manifest, rng, spec.ir_length));

  const int rate = fs.sample_rate;
  const auto decoder = spec.cardioid_decoder
                           ? MakeCardioidDecoder(fs.order, fs.convention)
                           : MakeOmniDecoder(fs.order, fs.convention);
  SaveBinauralDecoder(root / "decoder.wav", decoder, rate);

  std::filesystem::create_directories(root / "audio");
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& id : spec.source_ids) {
    SourceSample s = RandomSource(rng, spec.source_seconds, rate, id, spec.amplitude);
    if (spec.tone_hz > 0.0) {
      const double n = double(s.samples.size());
      const double cycles = std::max(1.0, std::round(spec.tone_hz * n / rate));
      for (size_t i = 0; i < s.samples.size(); ++i) {
        s.samples[i] = float(spec.amplitude *
                             std::sin(2.0 * std::numbers::pi * cycles * double(i) / n));
      }
    }
    WriteMono(root / "audio" / (id + ".wav"), s.samples, rate);
    sources.push_back({{"id", id}, {"path", "audio/" + id + ".wav"}});
  }

  nlohmann::json config = {
      {"dataset", {{"root", "dataset"}}},
      {"decoder", "decoder.wav"},
      {"sources", sources},
      {"audio", {{"sink", "null"}, {"block", 512}}},
      {"osc", {{"listen", "127.0.0.1"}, {"port", 0}, {"notify_port", 0}}},
      {"websocket", {{"listen", "127.0.0.1"}, {"port", 0}}},
      {"session",
       {{"assessor", spec.assessor},
        {"session", spec.session},
        {"trials", spec.trials},
        {"seed", spec.session_seed}}},
      {"output_dir", "out"}};
  out.config = root / "config.json";
  out.output_dir = root / "out";
  std::ofstream(out.config) << config.dump(2) << '\n';
  return out;
}

}  // namespace auralab::testing
