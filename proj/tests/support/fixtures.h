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


// Synthetic datasets written with the documented on-disk layout.

#ifndef AURALAB_TESTS_SUPPORT_FIXTURES_H_
#define AURALAB_TESTS_SUPPORT_FIXTURES_H_

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "auralab/arir_store.h"
#include "auralab/binaural.h"

namespace auralab::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "auralab");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

struct FixtureSpec {
  // (condition id, directory)
  std::vector<std::pair<std::string, std::string>> conditions = {
      {"reference", "reference"}};
  int sources = 2;
  int sample_rate = 48000;
  int order = 2;
  AmbisonicConvention convention = AmbisonicConvention::kAcnSn3d;
  // Empty = all 25 seats for every condition.
  std::vector<std::string> seats;
};

Manifest MakeManifest(const FixtureSpec& spec);

// Exponentially decaying noise, (order+1)^2 channels.
MultichannelIr RandomArir(std::mt19937_64& rng, int channels, size_t length,
                          double decay_samples = 0.0);

std::map<ArirSet::Key, MultichannelIr> RandomEntries(const Manifest& manifest,
                                                     std::mt19937_64& rng,
                                                     size_t length);

// Writes manifest.json and every IR; returns the manifest path.
std::filesystem::path WriteFixture(
    const std::filesystem::path& root, const Manifest& manifest,
    const std::map<ArirSet::Key, MultichannelIr>& entries);

SourceSample RandomSource(std::mt19937_64& rng, double seconds, int rate,
                          const std::string& id, double amplitude = 0.5);
void WriteMono(const std::filesystem::path& path, const std::vector<float>& x,
               int rate);

// A complete serve setup: dataset, decoder, source WAVs and config.json.
struct ServeFixtureSpec {
  uint64_t seed = 1;
  size_t ir_length = 2048;
  double source_seconds = 6.0;
  // 0: noise sources. Otherwise a sine rounded to whole cycles per loop.
  double tone_hz = 0.0;
  double amplitude = 0.3;
  bool cardioid_decoder = true;
  std::vector<std::string> source_ids = {"castanets", "speech"};
  std::vector<std::string> trials = {"castanets"};
  uint64_t session_seed = 7;
  std::string assessor = "a01";
  std::string session = "s1";
};

struct ServeFixture {
  std::filesystem::path config;
  std::filesystem::path output_dir;
  Manifest manifest;
};

ServeFixture WriteServeFixture(const std::filesystem::path& root,
                               const ServeFixtureSpec& spec = {});

}  // namespace auralab::testing

#endif  // AURALAB_TESTS_SUPPORT_FIXTURES_H_
