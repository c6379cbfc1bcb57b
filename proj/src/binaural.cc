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


#include "auralab/binaural.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "auralab/dsp_error.h"
#include "auralab/wav.h"

namespace auralab {

size_t BinauralDecoder::length() const {
  size_t n = 0;
  for (const auto& pair : firs) {
    n = std::max({n, pair[0].size(), pair[1].size()});
  }
  return n;
}

BinauralDecoder LoadBinauralDecoder(const std::filesystem::path& path,
                                    AmbisonicConvention convention) {
  WavData wav;
  try {
    wav = ReadWav(path);
  } catch (const WavError& e) {
    throw ArirError(ArirErrc::kUnreadableFile, e.what());
  }
  const size_t pairs = wav.num_channels() / 2;
  int order = 0;
  for (int n = 1; n <= 3; ++n) {
    if (size_t((n + 1) * (n + 1)) == pairs) order = n;
  }
  if (order == 0 || wav.num_channels() % 2 != 0) {
    throw DspError(DspErrc::kDimensionMismatch,
                   path.string() + ": " + std::to_string(wav.num_channels()) +
                       " channels is not 2 x (order+1)^2");
  }
  if (wav.num_frames() == 0) {
    throw DspError(DspErrc::kEmptyIr, path.string() + " has no taps");
  }
  BinauralDecoder dec;
  dec.order = order;
  dec.convention = convention;
  dec.firs.resize(pairs);
  for (size_t c = 0; c < pairs; ++c) {
    for (int ear = 0; ear < 2; ++ear) {
      const auto& src = wav.channels[2 * c + ear];
      for (float v : src) {
        if (!std::isfinite(v)) {
          throw ArirError(ArirErrc::kNonFiniteSample, path.string());
        }
      }
      dec.firs[c][ear].assign(src.begin(), src.end());
    }
  }
  return dec;
}

void SaveBinauralDecoder(const std::filesystem::path& path,
                         const BinauralDecoder& decoder, int sample_rate) {
  WavData wav;
  wav.sample_rate = sample_rate;
  const size_t len = decoder.length();
  for (const auto& pair : decoder.firs) {
    for (int ear = 0; ear < 2; ++ear) {
      std::vector<float> ch(len, 0.0f);
      std::transform(pair[ear].begin(), pair[ear].end(), ch.begin(),
                     [](double v) { return float(v); });
      wav.channels.push_back(std::move(ch));
    }
  }
  WriteWavFloat(path, wav);
}

BinauralDecoder MakeOmniDecoder(int order, AmbisonicConvention convention) {
  BinauralDecoder dec;
  dec.order = order;
  dec.convention = convention;
  dec.firs.resize((order + 1) * (order + 1));
  for (auto& pair : dec.firs) pair = {std::vector<double>{0.0}, {0.0}};
  dec.firs[0] = {std::vector<double>{1.0}, {1.0}};
  return dec;
}

BinauralDecoder MakeCardioidDecoder(int order, AmbisonicConvention convention) {
  BinauralDecoder dec = MakeOmniDecoder(order, convention);
  // ACN 1 carries the y (left) dipole: sqrt(3) * y in N3D, y in SN3D.
  const double dipole =
      convention == AmbisonicConvention::kAcnN3d ? 1.0 / std::sqrt(3.0) : 1.0;
  dec.firs[0] = {std::vector<double>{0.5}, {0.5}};
  dec.firs[1] = {std::vector<double>{0.5 * dipole}, {-0.5 * dipole}};
  return dec;
}

BinauralRenderer::BinauralRenderer(const BinauralDecoder& decoder, size_t block)
    : block_(block) {
  if (!IsPowerOfTwo(block)) {
    throw DspError(DspErrc::kInvalidBlockSize, std::to_string(block));
  }
  if (decoder.firs.empty() || decoder.length() == 0) {
    throw DspError(DspErrc::kMissingDecoder, "decoder has no filters");
  }
  fft_ = std::make_unique<RealFft>(2 * block_);
  for (const auto& pair : decoder.firs) {
    std::vector<std::vector<double>> ears = {pair[0], pair[1]};
    auto kernel = std::make_unique<PartitionedKernel>(ears, block_, *fft_);
    const bool nonzero =
        std::any_of(pair[0].begin(), pair[0].end(), [](double v) { return v != 0.0; }) ||
        std::any_of(pair[1].begin(), pair[1].end(), [](double v) { return v != 0.0; });
    active_.push_back(nonzero);
    fdls_.push_back(std::make_unique<FrequencyDelayLine>(
        block_, kernel->num_partitions()));
    kernels_.push_back(std::move(kernel));
  }
  split_acc_.assign(2 * (block_ + 1), 0.0);
  acc_.assign(block_ + 1, Complex());
  time_.assign(2 * block_, 0.0);
}

void BinauralRenderer::Process(const AudioBlock& in, AudioBlock& out) {
  if (int(in.channels()) != channel_count() || in.frames() != block_ ||
      out.channels() != 2 || out.frames() != block_) {
    throw DspError(DspErrc::kDimensionMismatch,
                   "decoder expects " + std::to_string(channel_count()) +
                       " x " + std::to_string(block_) + " input, got " +
                       std::to_string(in.channels()) + " x " +
                       std::to_string(in.frames()));
  }
  for (size_t c = 0; c < kernels_.size(); ++c) {
    if (active_[c]) fdls_[c]->Push(in.channel(c), *fft_);
  }
  const double scale = 1.0 / double(2 * block_);
  for (int ear = 0; ear < 2; ++ear) {
    std::fill(split_acc_.begin(), split_acc_.end(), 0.0);
    for (size_t c = 0; c < kernels_.size(); ++c) {
      if (!active_[c] || fdls_[c]->silent()) continue;
      MultiplyAccumulate(*fdls_[c], 0, *kernels_[c], ear, 0, split_acc_);
    }
    Interleave(split_acc_, acc_);
    fft_->Inverse(acc_, time_);
    auto dst = out.channel(ear);
    for (size_t n = 0; n < block_; ++n) dst[n] = time_[block_ + n] * scale;
  }
}

void BinauralRenderer::Reset() {
  for (auto& fdl : fdls_) fdl->Reset();
}

AudioBlock BinauralDecode(BinauralRenderer& renderer, const AudioBlock& in) {
  AudioBlock out(2, renderer.block_size());
  renderer.Process(in, out);
  return out;
}

}  // namespace auralab
