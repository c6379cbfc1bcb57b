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

#ifndef AURALAB_WAV_H_
#define AURALAB_WAV_H_

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace auralab {

// Planar multichannel audio as read from / written to RIFF WAV.
struct WavData {
  int sample_rate = 0;
  // channels[c][n]
  std::vector<std::vector<float>> channels;

  size_t num_channels() const { return channels.size(); }
  size_t num_frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads PCM (16/24/32 bit integer) or IEEE float (32/64 bit) WAV files,
// including WAVE_FORMAT_EXTENSIBLE. Integer formats are scaled to [-1, 1).
WavData ReadWav(const std::filesystem::path& path);

// Writes 32-bit IEEE float. Files with more than two channels use
// WAVE_FORMAT_EXTENSIBLE with an unassigned channel mask.
void WriteWavFloat(const std::filesystem::path& path, const WavData& data);

// Appends interleaved 32-bit float frames to a WAV file of unknown final
// length; the header sizes are patched on Close.
class WavStreamWriter {
 public:
  WavStreamWriter(const std::filesystem::path& path, int channels,
                  int sample_rate);
  ~WavStreamWriter();
  WavStreamWriter(const WavStreamWriter&) = delete;
  WavStreamWriter& operator=(const WavStreamWriter&) = delete;

  void Write(const float* interleaved, size_t frames);
  void Close();
  uint64_t frames() const { return frames_; }

 private:
  std::FILE* file_ = nullptr;
  int channels_;
  int sample_rate_ = 0;
  uint64_t frames_ = 0;
};

}  // namespace auralab

#endif  // AURALAB_WAV_H_
