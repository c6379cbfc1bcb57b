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


#ifndef AURALAB_FFT_H_
#define AURALAB_FFT_H_

#include <complex>
#include <cstddef>
#include <span>

namespace auralab {

// Real-input FFT of a fixed even size backed by FFTW. Plans are built with
// FFTW_ESTIMATE so results are bit-reproducible run to run. Each instance
// owns its scratch buffers; one instance must not be used from two threads
// at once.
class RealFft {
 public:
  explicit RealFft(size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  size_t size() const { return size_; }
  size_t bins() const { return size_ / 2 + 1; }

  // in.size() == size(), out.size() == bins().
  void Forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: Inverse(Forward(x)) == size() * x.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  size_t size_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

}  // namespace auralab

#endif  // AURALAB_FFT_H_
