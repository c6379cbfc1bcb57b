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


#include <cmath>
#include <numbers>
#include <random>

#include "auralab/dsp_error.h"
#include "auralab/sh_rotation.h"
#include "doctest.h"
#include "support/oracles.h"

namespace auralab {
namespace {

using testing::RandomQuaternion;
using testing::RealShN3d;
using testing::RealShSn3d;

TEST_CASE("identity orientation gives the identity matrix") {
  for (int order = 1; order <= 3; ++order) {
    const auto r = ComputeShRotation(Orientation::Identity(), order);
    for (int i = 0; i < r.dim(); ++i) {
      for (int j = 0; j < r.dim(); ++j) {
        CHECK(r(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("pure yaw leaves the m = 0 channels untouched") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  constexpr int kZonal[] = {0, 2, 6};
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = ComputeShRotation(Orientation::FromYaw(angle(rng)), 2);
    for (int z : kZonal) {
      for (int k = 0; k < 9; ++k) {
        const double expected = k == z ? 1.0 : 0.0;
        CHECK(std::abs(r(z, k) - expected) <= 1e-12);
        CHECK(std::abs(r(k, z) - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("matrix matches the direction-sampling least-squares oracle") {
  std::mt19937_64 rng(11);
  for (int order = 1; order <= 3; ++order) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto q = RandomQuaternion(rng);
      const auto o = *Orientation::FromQuaternion(q[0], q[1], q[2], q[3]);
      const auto r = ComputeShRotation(o, order);
      const auto oracle = testing::ShRotationBySampling(
          order, q[0], q[1], q[2], q[3], 100, rng);
      double err = 0;
      for (int i = 0; i < r.dim(); ++i) {
        for (int j = 0; j < r.dim(); ++j) {
          err = std::max(err, std::abs(r(i, j) - oracle[i * r.dim() + j]));
        }
      }
      CHECK_MESSAGE(err <= 1e-6, "order " << order << " trial " << trial);
    }
  }
}

TEST_CASE("rotation is orthogonal and block diagonal with R00 = 1") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = RandomQuaternion(rng);
    const auto r =
        ComputeShRotation(*Orientation::FromQuaternion(q[0], q[1], q[2], q[3]), 3);
    CHECK(r(0, 0) == 1.0);
    for (int i = 0; i < r.dim(); ++i) {
      const int li = int(std::sqrt(double(i)));
      for (int j = 0; j < r.dim(); ++j) {
        const int lj = int(std::sqrt(double(j)));
        if (li != lj) CHECK(r(i, j) == 0.0);
        double dot = 0;
        for (int k = 0; k < r.dim(); ++k) dot += r(i, k) * r(j, k);
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("turning the head left moves a frontal source to the right") {
  // Head yawed +90 degrees: room +x now lies along the head's -y axis.
  const auto r = ComputeShRotation(Orientation::FromYaw(std::numbers::pi / 2), 2);
  const auto front = RealShSn3d(2, {1, 0, 0});
  const auto right = RealShSn3d(2, {0, -1, 0});
  for (int i = 0; i < 9; ++i) {
    double v = 0;
    for (int j = 0; j < 9; ++j) v += r(i, j) * front[j];
    CHECK(v == doctest::Approx(right[i]).epsilon(1e-12));
  }
}

TEST_CASE("SN3D-encoded plane waves rotate consistently") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = RandomQuaternion(rng);
    const auto o = *Orientation::FromQuaternion(q[0], q[1], q[2], q[3]);
    const auto r = ComputeShRotation(o, 2);
    const auto d = testing::RandomDirection(rng);
    const auto m = o.ToMatrix();
    std::array<double, 3> local{};
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) local[i] += m[k][i] * d[k];
    }
    const auto in = RealShSn3d(2, d);
    const auto expected = RealShSn3d(2, local);
    for (int i = 0; i < 9; ++i) {
      double v = 0;
      for (int j = 0; j < 9; ++j) v += r(i, j) * in[j];
      CHECK(std::abs(v - expected[i]) <= 1e-9);
    }
  }
}

TEST_CASE("apply rotation") {
  std::mt19937_64 rng(14);
  AudioBlock block(9, 64);
  for (size_t c = 0; c < 9; ++c) {
    auto v = testing::RandomSignal(rng, 64);
    std::copy(v.begin(), v.end(), block.channel(c).begin());
  }

  SUBCASE("identity is a no-op") {
    const auto out = ApplyRotation(ComputeShRotation(Orientation::Identity(), 2), block);
    CHECK(out == block);
  }
  SUBCASE("zero in, zero out") {
    AudioBlock zero(9, 64);
    const auto q = RandomQuaternion(rng);
    const auto out = ApplyRotation(
        ComputeShRotation(*Orientation::FromQuaternion(q[0], q[1], q[2], q[3]), 2),
        zero);
    CHECK(out == zero);
  }
  SUBCASE("matches a naive per-frame product and preserves energy") {
    const auto q = RandomQuaternion(rng);
    const auto r =
        ComputeShRotation(*Orientation::FromQuaternion(q[0], q[1], q[2], q[3]), 2);
    const auto out = ApplyRotation(r, block);
    for (size_t n = 0; n < 64; ++n) {
      double norm_in = 0, norm_out = 0;
      for (int i = 0; i < 9; ++i) {
        double v = 0;
        for (int j = 0; j < 9; ++j) v += r(i, j) * block.at(j, n);
        CHECK(std::abs(out.at(i, n) - v) <= 1e-9);
        norm_in += block.at(i, n) * block.at(i, n);
        norm_out += out.at(i, n) * out.at(i, n);
      }
      CHECK(std::abs(std::sqrt(norm_in) - std::sqrt(norm_out)) <= 1e-9);
    }
  }
  SUBCASE("dimension mismatch") {
    AudioBlock four(4, 64);
    try {
      ApplyRotation(ComputeShRotation(Orientation::Identity(), 2), four);
      FAIL("expected DimensionMismatch");
    } catch (const DspError& e) {
      CHECK(e.code() == DspErrc::kDimensionMismatch);
    }
  }
}

TEST_CASE("unsupported order and degenerate quaternions") {
  try {
    ComputeShRotation(Orientation::Identity(), 4);
    FAIL("expected UnsupportedOrder");
  } catch (const DspError& e) {
    CHECK(e.code() == DspErrc::kUnsupportedOrder);
  }
  CHECK_THROWS_AS(ComputeShRotation(Orientation::Identity(), 0), DspError);
  CHECK_FALSE(Orientation::FromQuaternion(0, 0, 0, 0).has_value());
  CHECK_FALSE(Orientation::FromQuaternion(NAN, 0, 0, 1).has_value());
  const auto o = Orientation::FromQuaternion(2, 0, 0, 0);
  REQUIRE(o.has_value());
  CHECK(o->w == 1.0);
}

}  // namespace
}  // namespace auralab
