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


// Uniformly partitioned overlap-save convolution (UPOLS).
//
// A kernel of length M is cut into P = ceil(M / B) partitions of B taps. Each
// partition is zero-padded to 2B and transformed once. The input is consumed
// in blocks of B; the spectrum of every 2B window [previous block, current
// block] is kept in a frequency-domain delay line (FDL). The output of one
// block is the last B samples of IFFT(sum_p X[k - p] * H[p]).

#ifndef AURALAB_CONVOLVER_H_
#define AURALAB_CONVOLVER_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "auralab/fft.h"

namespace auralab {

using Complex = std::complex<double>;

inline bool IsPowerOfTwo(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// A spectrum of `bins` bins stored as all real parts followed by all
// imaginary parts.
template <typename Real>
struct SplitSpectrum {
  const Real* re = nullptr;
  const Real* im = nullptr;
};

// Writes split[0, bins) + i * split[bins, 2 * bins) into out.
void Interleave(std::span<const double> split, std::span<Complex> out);

// The single-precision variant halves the memory streamed per block for long
// kernels.
template <typename Real>
class BasicPartitionedKernel {
 public:

  // fft.size() must be 2 * partition.
  BasicPartitionedKernel(const std::vector<std::vector<double>>& channels,
                         size_t partition, RealFft& fft);
  BasicPartitionedKernel(const std::vector<std::vector<float>>& channels,
                         size_t partition, RealFft& fft);

  size_t partition_size() const { return partition_; }
  size_t bins() const { return partition_ + 1; }
  size_t num_channels() const { return channels_; }
  size_t num_partitions() const { return partitions_; }
  size_t length() const { return length_; }

  SplitSpectrum<Real> Partition(size_t channel, size_t p) const {
    const Real* base = data_.data() + (channel * partitions_ + p) * 2 * bins();
    return {base, base + bins()};
  }

 private:
  template <typename T>
  void Build(const std::vector<std::vector<T>>& channels, RealFft& fft);

  size_t partition_;
  size_t channels_ = 0;
  size_t partitions_ = 0;
  size_t length_ = 0;
  std::vector<Real> data_;
};

using PartitionedKernel = BasicPartitionedKernel<double>;
using CompactKernel = BasicPartitionedKernel<float>;

class FrequencyDelayLine {
 public:
  FrequencyDelayLine(size_t partition, size_t depth);

  // Consumes the next block of exactly partition_size() samples.
  void Push(std::span<const double> block, RealFft& fft);
  // Pushes a window spectrum computed elsewhere; `block` is the time-domain
  // block it ends with.
  void PushSpectrum(std::span<const Complex> spectrum,
                    std::span<const double> block);

  // age 0 is the newest window.
  SplitSpectrum<double> Spectrum(size_t age) const {
    const double* base = ring_.data() + ((head_ + depth_ - age) % depth_) * 2 * bins_;
    return {base, base + bins_};
  }
  std::span<const double> previous_block() const { return prev_; }
  size_t partition_size() const { return partition_; }
  size_t depth() const { return depth_; }
  // True once every stored window was computed from all-zero input.
  bool silent() const { return quiet_windows_ >= depth_; }
  void Reset();

 private:
  size_t partition_;
  size_t bins_;
  size_t depth_;
  size_t head_ = 0;
  size_t quiet_windows_;
  bool prev_zero_ = true;
  void Store(std::span<const Complex> spectrum);

  std::vector<double> ring_;
  std::vector<double> prev_;
  std::vector<double> window_;
  std::vector<Complex> spectrum_;
};

// acc += sum over p in [first_partition, P) of
//        fdl.Spectrum(first_age + p - first_partition) * kernel[channel][p].
// acc is split: 2 * bins values. Windows older than the FDL depth are
// treated as zero.
template <typename Real>
void MultiplyAccumulate(const FrequencyDelayLine& fdl, size_t first_age,
                        const BasicPartitionedKernel<Real>& kernel, size_t channel,
                        size_t first_partition, std::span<double> acc);

// Streaming single-input convolver with one output per kernel channel.
// Process() accepts any number of samples per call; output is
// sample-for-sample equal to direct convolution with no added latency.
class Convolver {
 public:
  Convolver(const std::vector<std::vector<double>>& kernels, size_t block,
            size_t partition);
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;
  ~Convolver();

  size_t num_outputs() const { return kernel_->num_channels(); }
  size_t block_size() const { return block_; }
  size_t partition_size() const { return partition_; }

  void Process(std::span<const double> in, std::span<double> out);
  // outs.size() == num_outputs(); each output has in.size() samples.
  void Process(std::span<const double> in, std::span<const std::span<double>> outs);
  void Reset();

 private:
  void StartBlock();

  size_t block_;
  size_t partition_;
  std::unique_ptr<RealFft> fft_;
  std::unique_ptr<PartitionedKernel> kernel_;
  std::unique_ptr<FrequencyDelayLine> fdl_;
  std::vector<double> current_;
  size_t fill_ = 0;
  std::vector<std::vector<double>> tail_;
  std::vector<double> window_;
  std::vector<Complex> window_spectrum_;
  std::vector<double> split_acc_;
  std::vector<Complex> acc_;
  std::vector<double> time_;
};

// Throws DspError kEmptyIr for an empty kernel and kInvalidBlockSize unless
// block and partition are powers of two.
Convolver MakeConvolver(std::span<const double> ir, size_t block,
                        size_t partition);

}  // namespace auralab

#endif  // AURALAB_CONVOLVER_H_
