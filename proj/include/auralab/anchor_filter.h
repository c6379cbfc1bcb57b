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


#ifndef AURALAB_ANCHOR_FILTER_H_
#define AURALAB_ANCHOR_FILTER_H_

#include <array>
#include <complex>
#include <vector>

#include "auralab/audio_block.h"

namespace auralab {

inline constexpr double kAnchorCutoffHz = 3500.0;

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;  // a0 normalized to 1
};

// 4th-order Butterworth low-pass as two cascaded biquads, designed with the
// bilinear transform and the cutoff prewarped so |H(cutoff)| is exactly
// 1/sqrt(2). Transposed direct form II, one state pair per section and
// channel.
class AnchorFilter {
 public:
  static constexpr int kOrder = 4;

  AnchorFilter(double cutoff_hz, double sample_rate, size_t channels = 2);

  double cutoff() const { return cutoff_; }
  double sample_rate() const { return rate_; }
  const std::array<Biquad, 2>& sections() const { return sections_; }

  // Analytic frequency response of the cascade.
  std::complex<double> Response(double hz) const;
  // Roots of each section's denominator.
  std::array<std::complex<double>, 4> Poles() const;

  void Process(AudioBlock& block);
  double ProcessSample(size_t channel, double x);
  void Reset();

 private:
  double cutoff_;
  double rate_;
  std::array<Biquad, 2> sections_;
  // state_[channel][section] = {z1, z2}
  std::vector<std::array<std::array<double, 2>, 2>> state_;
};

// Throws DspError kCutoffOutOfRange unless 0 < cutoff < rate / 2.
AnchorFilter DesignAnchorFilter(double cutoff_hz, double sample_rate,
                                size_t channels = 2);

}  // namespace auralab

#endif  // AURALAB_ANCHOR_FILTER_H_
