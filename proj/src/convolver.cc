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


#include "auralab/convolver.h"

#include <algorithm>

#include "auralab/dsp_error.h"

namespace auralab {

template <typename Real>
BasicPartitionedKernel<Real>::BasicPartitionedKernel(
    const std::vector<std::vector<double>>& channels, size_t partition,
    RealFft& fft)
    : partition_(partition) {
  Build(channels, fft);
}

template <typename Real>
BasicPartitionedKernel<Real>::BasicPartitionedKernel(
    const std::vector<std::vector<float>>& channels, size_t partition,
    RealFft& fft)
    : partition_(partition) {
  Build(channels, fft);
}

template <typename Real>
template <typename T>
void BasicPartitionedKernel<Real>::Build(const std::vector<std::vector<T>>& channels,
                                         RealFft& fft) {
  if (channels.empty()) throw DspError(DspErrc::kEmptyIr, "no kernel channels");
  if (fft.size() != 2 * partition_) {
    throw DspError(DspErrc::kInvalidBlockSize, "FFT size must be 2x partition");
  }
  channels_ = channels.size();
  for (const auto& ch : channels) length_ = std::max(length_, ch.size());
  if (length_ == 0) throw DspError(DspErrc::kEmptyIr, "kernel has no taps");
  partitions_ = (length_ + partition_ - 1) / partition_;
  data_.assign(channels_ * partitions_ * 2 * bins(), Real());

  std::vector<double> padded(2 * partition_);
  std::vector<Complex> spectrum(bins());
  for (size_t c = 0; c < channels_; ++c) {
    const auto& taps = channels[c];
    for (size_t p = 0; p < partitions_; ++p) {
      std::fill(padded.begin(), padded.end(), 0.0);
      const size_t begin = p * partition_;
      const size_t end = std::min(taps.size(), begin + partition_);
      for (size_t n = begin; n < end; ++n) padded[n - begin] = double(taps[n]);
      fft.Forward(padded, spectrum);
      Real* re = data_.data() + (c * partitions_ + p) * 2 * bins();
      for (size_t b = 0; b < bins(); ++b) {
        re[b] = Real(spectrum[b].real());
        re[bins() + b] = Real(spectrum[b].imag());
      }
    }
  }
}

template class BasicPartitionedKernel<double>;
template class BasicPartitionedKernel<float>;

FrequencyDelayLine::FrequencyDelayLine(size_t partition, size_t depth)
    : partition_(partition),
      bins_(partition + 1),
      depth_(std::max<size_t>(depth, 1)),
      quiet_windows_(depth_),
      ring_(depth_ * 2 * bins_),
      prev_(partition),
      window_(2 * partition),
      spectrum_(bins_) {}

void FrequencyDelayLine::Store(std::span<const Complex> spectrum) {
  head_ = (head_ + 1) % depth_;
  double* re = ring_.data() + head_ * 2 * bins_;
  for (size_t b = 0; b < bins_; ++b) {
    re[b] = spectrum[b].real();
    re[bins_ + b] = spectrum[b].imag();
  }
}

void FrequencyDelayLine::Push(std::span<const double> block, RealFft& fft) {
  std::copy(prev_.begin(), prev_.end(), window_.begin());
  std::copy(block.begin(), block.end(), window_.begin() + partition_);
  fft.Forward(window_, spectrum_);
  Store(spectrum_);
  const bool zero =
      std::all_of(block.begin(), block.end(), [](double v) { return v == 0.0; });
  quiet_windows_ = (zero && prev_zero_) ? std::min(quiet_windows_ + 1, depth_) : 0;
  prev_zero_ = zero;
  std::copy(block.begin(), block.end(), prev_.begin());
}

void FrequencyDelayLine::PushSpectrum(std::span<const Complex> spectrum,
                                      std::span<const double> block) {
  Store(spectrum);
  const bool zero =
      std::all_of(block.begin(), block.end(), [](double v) { return v == 0.0; });
  quiet_windows_ = (zero && prev_zero_) ? std::min(quiet_windows_ + 1, depth_) : 0;
  prev_zero_ = zero;
  std::copy(block.begin(), block.end(), prev_.begin());
}

void FrequencyDelayLine::Reset() {
  std::fill(ring_.begin(), ring_.end(), 0.0);
  std::fill(prev_.begin(), prev_.end(), 0.0);
  head_ = 0;
  quiet_windows_ = depth_;
  prev_zero_ = true;
}

namespace {

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define AURALAB_SIMD_CLONES __attribute__((target_clones("arch=haswell", "default")))
#else
#define AURALAB_SIMD_CLONES
#endif

// out += x * h on split spectra.
template <typename Real>
__attribute__((always_inline)) inline void SplitMacImpl(
    const double* __restrict xr, const double* __restrict xi, const Real* __restrict hr,
    const Real* __restrict hi, double* __restrict yr, double* __restrict yi,
    size_t bins) {
  for (size_t b = 0; b < bins; ++b) {
    const double a = xr[b], c = xi[b];
    const double d = hr[b], e = hi[b];
    yr[b] += a * d - c * e;
    yi[b] += a * e + c * d;
  }
}

AURALAB_SIMD_CLONES void SplitMac(const double* xr, const double* xi, const double* hr,
                                  const double* hi, double* yr, double* yi,
                                  size_t bins) {
  SplitMacImpl(xr, xi, hr, hi, yr, yi, bins);
}

AURALAB_SIMD_CLONES void SplitMac(const double* xr, const double* xi, const float* hr,
                                  const float* hi, double* yr, double* yi, size_t bins) {
  SplitMacImpl(xr, xi, hr, hi, yr, yi, bins);
}

}  // namespace

void Interleave(std::span<const double> split, std::span<Complex> out) {
  const size_t bins = out.size();
  for (size_t b = 0; b < bins; ++b) out[b] = {split[b], split[bins + b]};
}

template <typename Real>
void MultiplyAccumulate(const FrequencyDelayLine& fdl, size_t first_age,
                        const BasicPartitionedKernel<Real>& kernel, size_t channel,
                        size_t first_partition, std::span<double> acc) {
  const size_t bins = kernel.bins();
  double* yr = acc.data();
  double* yi = acc.data() + bins;
  for (size_t p = first_partition; p < kernel.num_partitions(); ++p) {
    const size_t age = first_age + (p - first_partition);
    if (age >= fdl.depth()) break;
    const SplitSpectrum<double> x = fdl.Spectrum(age);
    const SplitSpectrum<Real> h = kernel.Partition(channel, p);
    SplitMac(x.re, x.im, h.re, h.im, yr, yi, bins);
  }
}

template void MultiplyAccumulate(const FrequencyDelayLine&, size_t,
                                 const BasicPartitionedKernel<double>&, size_t, size_t,
                                 std::span<double>);
template void MultiplyAccumulate(const FrequencyDelayLine&, size_t,
                                 const BasicPartitionedKernel<float>&, size_t, size_t,
                                 std::span<double>);

Convolver::Convolver(const std::vector<std::vector<double>>& kernels,
                     size_t block, size_t partition)
    : block_(block), partition_(partition) {
  if (!IsPowerOfTwo(block) || !IsPowerOfTwo(partition)) {
    throw DspError(DspErrc::kInvalidBlockSize,
                   "block " + std::to_string(block) + " / partition " +
                       std::to_string(partition) + " must be powers of two");
  }
  fft_ = std::make_unique<RealFft>(2 * partition_);
  kernel_ = std::make_unique<PartitionedKernel>(kernels, partition_, *fft_);
  fdl_ = std::make_unique<FrequencyDelayLine>(
      partition_, std::max<size_t>(kernel_->num_partitions() - 1, 1));
  current_.assign(partition_, 0.0);
  tail_.assign(kernel_->num_channels(), std::vector<double>(partition_));
  window_.assign(2 * partition_, 0.0);
  window_spectrum_.assign(partition_ + 1, Complex());
  split_acc_.assign(2 * (partition_ + 1), 0.0);
  acc_.assign(partition_ + 1, Complex());
  time_.assign(2 * partition_, 0.0);
  Reset();
}

Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;
Convolver::~Convolver() = default;

void Convolver::Reset() {
  fdl_->Reset();
  std::fill(current_.begin(), current_.end(), 0.0);
  fill_ = 0;
  for (auto& t : tail_) std::fill(t.begin(), t.end(), 0.0);
}

void Convolver::StartBlock() {
  const double scale = 1.0 / double(2 * partition_);
  for (size_t k = 0; k < tail_.size(); ++k) {
    auto& tail = tail_[k];
    if (kernel_->num_partitions() < 2 || fdl_->silent()) {
      std::fill(tail.begin(), tail.end(), 0.0);
      continue;
    }
    std::fill(split_acc_.begin(), split_acc_.end(), 0.0);
    MultiplyAccumulate(*fdl_, 0, *kernel_, k, 1, split_acc_);
    Interleave(split_acc_, acc_);
    fft_->Inverse(acc_, time_);
    for (size_t n = 0; n < partition_; ++n) {
      tail[n] = time_[partition_ + n] * scale;
    }
  }
}

void Convolver::Process(std::span<const double> in, std::span<double> out) {
  const std::span<double> outs[1] = {out};
  Process(in, std::span<const std::span<double>>(outs));
}

void Convolver::Process(std::span<const double> in,
                        std::span<const std::span<double>> outs) {
  if (outs.size() != num_outputs()) {
    throw DspError(DspErrc::kDimensionMismatch, "output count");
  }
  for (const auto& o : outs) {
    if (o.size() < in.size()) {
      throw DspError(DspErrc::kDimensionMismatch, "output shorter than input");
    }
  }
  const double scale = 1.0 / double(2 * partition_);
  size_t done = 0;
  while (done < in.size()) {
    const size_t n = std::min(in.size() - done, partition_ - fill_);
    std::copy_n(in.begin() + done, n, current_.begin() + fill_);
    const auto prev = fdl_->previous_block();
    std::copy(prev.begin(), prev.end(), window_.begin());
    std::copy(current_.begin(), current_.end(), window_.begin() + partition_);
    fft_->Forward(window_, window_spectrum_);

    for (size_t k = 0; k < num_outputs(); ++k) {
      const SplitSpectrum<double> h0 = kernel_->Partition(k, 0);
      for (size_t b = 0; b <= partition_; ++b) {
        const double xr = window_spectrum_[b].real(), xi = window_spectrum_[b].imag();
        acc_[b] = {xr * h0.re[b] - xi * h0.im[b], xr * h0.im[b] + xi * h0.re[b]};
      }
      fft_->Inverse(acc_, time_);
      const auto& tail = tail_[k];
      auto& dst = outs[k];
      for (size_t i = 0; i < n; ++i) {
        dst[done + i] = time_[partition_ + fill_ + i] * scale + tail[fill_ + i];
      }
    }

    fill_ += n;
    done += n;
    if (fill_ == partition_) {
      fdl_->PushSpectrum(window_spectrum_, current_);
      std::fill(current_.begin(), current_.end(), 0.0);
      fill_ = 0;
      StartBlock();
    }
  }
}

Convolver MakeConvolver(std::span<const double> ir, size_t block,
                        size_t partition) {
  if (ir.empty()) throw DspError(DspErrc::kEmptyIr, "impulse response is empty");
  return Convolver({std::vector<double>(ir.begin(), ir.end())}, block,
                   partition);
}

}  // namespace auralab
