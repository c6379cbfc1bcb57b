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


#include "auralab/anchor_filter.h"

#include <cmath>
#include <numbers>
#include <string>

#include "auralab/dsp_error.h"

namespace auralab {

AnchorFilter::AnchorFilter(double cutoff_hz, double sample_rate,
                           size_t channels)
    : cutoff_(cutoff_hz), rate_(sample_rate), state_(channels) {
  if (!(sample_rate > 0) || !(cutoff_hz > 0) || !(cutoff_hz < sample_rate / 2)) {
    throw DspError(DspErrc::kCutoffOutOfRange,
                   "cutoff " + std::to_string(cutoff_hz) + " Hz at rate " +
                       std::to_string(sample_rate));
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const double k2 = k * k;
  for (int s = 0; s < 2; ++s) {
    // Butterworth pole pair angles: Q = 1 / (2 sin((2s + 1) pi / 8)).
    const double q =
        1.0 / (2.0 * std::sin((2 * s + 1) * std::numbers::pi / (2 * kOrder)));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Biquad& b = sections_[s];
    b.b0 = k2 * norm;
    b.b1 = 2.0 * b.b0;
    b.b2 = b.b0;
    b.a1 = 2.0 * (k2 - 1.0) * norm;
    b.a2 = (1.0 - k / q + k2) * norm;
  }
  Reset();
}

std::complex<double> AnchorFilter::Response(double hz) const {
  const std::complex<double> z1 =
      std::polar(1.0, -2.0 * std::numbers::pi * hz / rate_);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& b : sections_) {
    h *= (b.b0 + b.b1 * z1 + b.b2 * z2) / (1.0 + b.a1 * z1 + b.a2 * z2);
  }
  return h;
}

std::array<std::complex<double>, 4> AnchorFilter::Poles() const {
  std::array<std::complex<double>, 4> poles;
  for (int s = 0; s < 2; ++s) {
    const auto& b = sections_[s];
    const std::complex<double> disc = std::sqrt(std::complex<double>(
        b.a1 * b.a1 - 4.0 * b.a2));
    poles[2 * s] = (-b.a1 + disc) / 2.0;
    poles[2 * s + 1] = (-b.a1 - disc) / 2.0;
  }
  return poles;
}

double AnchorFilter::ProcessSample(size_t channel, double x) {
  auto& st = state_[channel];
  for (int s = 0; s < 2; ++s) {
    const Biquad& b = sections_[s];
    const double y = b.b0 * x + st[s][0];
    st[s][0] = b.b1 * x - b.a1 * y + st[s][1];
    st[s][1] = b.b2 * x - b.a2 * y;
    x = y;
  }
  return x;
}

void AnchorFilter::Process(AudioBlock& block) {
  for (size_t c = 0; c < block.channels() && c < state_.size(); ++c) {
    for (double& v : block.channel(c)) v = ProcessSample(c, v);
  }
}

void AnchorFilter::Reset() {
  for (auto& st : state_) st = {};
}

AnchorFilter DesignAnchorFilter(double cutoff_hz, double sample_rate,
                                size_t channels) {
  return AnchorFilter(cutoff_hz, sample_rate, channels);
}

}  // namespace auralab
