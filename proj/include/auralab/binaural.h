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


// Ambisonic-to-binaural decoding with a bank of FIR filters, one (left,
// right) pair per ambisonic channel.
//
// Decoder files are WAVs with 2 * (order+1)^2 channels interleaved as
// (acn0_L, acn0_R, acn1_L, acn1_R, ...), every channel L taps long.

#ifndef AURALAB_BINAURAL_H_
#define AURALAB_BINAURAL_H_

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "auralab/arir_store.h"
#include "auralab/audio_block.h"
#include "auralab/convolver.h"

namespace auralab {

struct BinauralDecoder {
  int order = 2;
  AmbisonicConvention convention = AmbisonicConvention::kAcnSn3d;
  // firs[acn][0] = left ear, firs[acn][1] = right ear.
  std::vector<std::array<std::vector<double>, 2>> firs;

  int channel_count() const { return int(firs.size()); }
  size_t length() const;
};

// Throws ArirError for unreadable files and DspError kDimensionMismatch when
// the channel count is not 2 * (order+1)^2 for some order 1..3.
BinauralDecoder LoadBinauralDecoder(const std::filesystem::path& path,
                                    AmbisonicConvention convention);
void SaveBinauralDecoder(const std::filesystem::path& path,
                         const BinauralDecoder& decoder, int sample_rate);

// fir[0][L] = fir[0][R] = unit impulse, all other taps zero.
BinauralDecoder MakeOmniDecoder(int order, AmbisonicConvention convention);
// Single-tap virtual cardioids facing +y (left) and -y (right):
// ear = 0.5 * (W +/- Y) with Y rescaled to unit gain for the convention.
BinauralDecoder MakeCardioidDecoder(int order, AmbisonicConvention convention);

// Streaming decoder state. Consumes exactly one engine block per call.
class BinauralRenderer {
 public:
  BinauralRenderer(const BinauralDecoder& decoder, size_t block);

  size_t block_size() const { return block_; }
  int channel_count() const { return int(kernels_.size()); }

  // in: channel_count() x block, out: 2 x block.
  void Process(const AudioBlock& in, AudioBlock& out);
  void Reset();

 private:
  size_t block_;
  std::unique_ptr<RealFft> fft_;
  std::vector<std::unique_ptr<PartitionedKernel>> kernels_;
  std::vector<bool> active_;
  std::vector<std::unique_ptr<FrequencyDelayLine>> fdls_;
  std::vector<double> split_acc_;
  std::vector<Complex> acc_;
  std::vector<double> time_;
};

// Decodes one block, advancing the renderer's convolution state.
AudioBlock BinauralDecode(BinauralRenderer& renderer, const AudioBlock& in);

}  // namespace auralab

#endif  // AURALAB_BINAURAL_H_
