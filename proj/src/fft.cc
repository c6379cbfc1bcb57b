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


#include "auralab/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace auralab {
namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(size_t size) : size_(size) {
  if (size < 2 || size % 2 != 0) {
    throw std::invalid_argument("RealFft size must be even and >= 2");
  }
  std::lock_guard lock(PlannerMutex());
  real_ = fftw_alloc_real(size_);
  auto* cplx = fftw_alloc_complex(bins());
  complex_ = cplx;
  forward_ = fftw_plan_dft_r2c_1d(int(size_), real_, cplx, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(int(size_), cplx, real_,
                                  FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(complex_);
  fftw_free(real_);
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  std::memcpy(out.data(), complex_, bins() * sizeof(std::complex<double>));
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  std::memcpy(complex_, in.data(), bins() * sizeof(std::complex<double>));
  fftw_execute(static_cast<fftw_plan>(inverse_));
  std::copy(real_, real_ + size_, out.begin());
}

}  // namespace auralab
