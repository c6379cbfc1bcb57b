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


#ifndef AURALAB_AUDIO_BLOCK_H_
#define AURALAB_AUDIO_BLOCK_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace auralab {

// Channel-major block of double-precision samples.
class AudioBlock {
 public:
  AudioBlock() = default;
  AudioBlock(size_t channels, size_t frames)
      : channels_(channels), frames_(frames), data_(channels * frames, 0.0) {}

  size_t channels() const { return channels_; }
  size_t frames() const { return frames_; }

  std::span<double> channel(size_t c) {
    return {data_.data() + c * frames_, frames_};
  }
  std::span<const double> channel(size_t c) const {
    return {data_.data() + c * frames_, frames_};
  }
  double& at(size_t c, size_t n) { return data_[c * frames_ + n]; }
  double at(size_t c, size_t n) const { return data_[c * frames_ + n]; }

  void Clear() { std::fill(data_.begin(), data_.end(), 0.0); }
  bool AllFinite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const AudioBlock&) const = default;

 private:
  size_t channels_ = 0;
  size_t frames_ = 0;
  std::vector<double> data_;
};

}  // namespace auralab

#endif  // AURALAB_AUDIO_BLOCK_H_
