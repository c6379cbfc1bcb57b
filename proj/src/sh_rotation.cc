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


#include "auralab/sh_rotation.h"

#include <cmath>
#include <string>

#include "auralab/dsp_error.h"

namespace auralab {
namespace {

// Band-l rotation matrices, indexed [m + l][n + l].
using Band = std::array<std::array<double, 2 * kMaxShOrder + 1>,
                        2 * kMaxShOrder + 1>;
using Bands = std::array<Band, kMaxShOrder + 1>;

double Centered(const Band& band, int l, int i, int j) {
  return band[i + l][j + l];
}

double Delta(int a, int b) { return a == b ? 1.0 : 0.0; }

double P(const Bands& bands, int i, int a, int b, int l) {
  const Band& r1 = bands[1];
  const Band& prev = bands[l - 1];
  if (b == l) {
    return Centered(r1, 1, i, 1) * Centered(prev, l - 1, a, l - 1) -
           Centered(r1, 1, i, -1) * Centered(prev, l - 1, a, -l + 1);
  }
  if (b == -l) {
    return Centered(r1, 1, i, 1) * Centered(prev, l - 1, a, -l + 1) +
           Centered(r1, 1, i, -1) * Centered(prev, l - 1, a, l - 1);
  }
  return Centered(r1, 1, i, 0) * Centered(prev, l - 1, a, b);
}

double U(const Bands& r, int m, int n, int l) {
  return P(r, 0, m, n, l);
}

double V(const Bands& r, int m, int n, int l) {
  if (m == 0) return P(r, 1, 1, n, l) + P(r, -1, -1, n, l);
  if (m > 0) {
    return P(r, 1, m - 1, n, l) * std::sqrt(1.0 + Delta(m, 1)) -
           P(r, -1, -m + 1, n, l) * (1.0 - Delta(m, 1));
  }
  return P(r, 1, m + 1, n, l) * (1.0 - Delta(m, -1)) +
         P(r, -1, -m - 1, n, l) * std::sqrt(1.0 + Delta(m, -1));
}

double W(const Bands& r, int m, int n, int l) {
  if (m == 0) return 0.0;
  if (m > 0) return P(r, 1, m + 1, n, l) + P(r, -1, -m - 1, n, l);
  return P(r, 1, m - 1, n, l) - P(r, -1, -m + 1, n, l);
}

}  // namespace

std::optional<Orientation> Orientation::FromQuaternion(double w, double x,
                                                       double y, double z) {
  if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) ||
      !std::isfinite(z)) {
    return std::nullopt;
  }
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 1e-9) || !std::isfinite(norm)) return std::nullopt;
  return Orientation{w / norm, x / norm, y / norm, z / norm};
}

Orientation Orientation::FromYaw(double radians) {
  return {std::cos(radians / 2), 0.0, 0.0, std::sin(radians / 2)};
}

Orientation Orientation::FromAxisAngle(double ax, double ay, double az,
                                       double radians) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  const double s = std::sin(radians / 2) / n;
  return {std::cos(radians / 2), ax * s, ay * s, az * s};
}

Matrix3 Orientation::ToMatrix() const {
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  return {{
      {ww + xx - yy - zz, 2 * (x * y - w * z), 2 * (x * z + w * y)},
      {2 * (x * y + w * z), ww - xx + yy - zz, 2 * (y * z - w * x)},
      {2 * (x * z - w * y), 2 * (y * z + w * x), ww - xx - yy + zz},
  }};
}

ShRotationMatrix::ShRotationMatrix(int order)
    : order_(order), dim_((order + 1) * (order + 1)) {
  if (order < 1 || order > kMaxShOrder) {
    throw DspError(DspErrc::kUnsupportedOrder,
                   "SH rotation supports orders 1..3, got " +
                       std::to_string(order));
  }
}

ShRotationMatrix ComputeShRotation(const Orientation& orientation, int order) {
  ShRotationMatrix out(order);
  ComputeShRotationInto(orientation, out);
  return out;
}

void ComputeShRotationInto(const Orientation& orientation,
                           ShRotationMatrix& out) {
  const int order = out.order();
  const Matrix3 q = orientation.ToMatrix();
  // ACN first-order channels are (Y, Z, X); the field rotates by Q^T.
  constexpr int kAxis[3] = {1, 2, 0};

  Bands bands{};
  bands[0][0][0] = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) bands[1][i][j] = q[kAxis[j]][kAxis[i]];
  }
  for (int l = 2; l <= order; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int n = -l; n <= l; ++n) {
        const int abs_m = std::abs(m);
        const double d = Delta(m, 0);
        const double denom =
            std::abs(n) == l ? double(2 * l * (2 * l - 1)) : double((l + n) * (l - n));
        const double u = std::sqrt(double((l + m) * (l - m)) / denom);
        const double v = 0.5 *
                         std::sqrt((1.0 + d) * double(l + abs_m - 1) *
                                   double(l + abs_m) / denom) *
                         (1.0 - 2.0 * d);
        const double w = -0.5 *
                         std::sqrt(double(l - abs_m - 1) * double(l - abs_m) /
                                   denom) *
                         (1.0 - d);
        double value = 0.0;
        if (u != 0.0) value += u * U(bands, m, n, l);
        if (v != 0.0) value += v * V(bands, m, n, l);
        if (w != 0.0) value += w * W(bands, m, n, l);
        bands[l][m + l][n + l] = value;
      }
    }
  }

  const int dim = out.dim();
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) out(i, j) = 0.0;
  }
  for (int l = 0; l <= order; ++l) {
    const int base = l * l;
    for (int i = 0; i < 2 * l + 1; ++i) {
      for (int j = 0; j < 2 * l + 1; ++j) {
        out(base + i, base + j) = bands[l][i][j];
      }
    }
  }
  out(0, 0) = 1.0;
}

void ApplyRotation(const ShRotationMatrix& rotation, const AudioBlock& in,
                   AudioBlock& out) {
  const int dim = rotation.dim();
  if (int(in.channels()) != dim || int(out.channels()) != dim ||
      in.frames() != out.frames()) {
    throw DspError(DspErrc::kDimensionMismatch,
                   "rotation of dimension " + std::to_string(dim) +
                       " applied to " + std::to_string(in.channels()) +
                       " channels");
  }
  const size_t frames = in.frames();
  for (int l = 0; l <= rotation.order(); ++l) {
    const int base = l * l;
    const int size = 2 * l + 1;
    for (int i = 0; i < size; ++i) {
      auto dst = out.channel(base + i);
      std::fill(dst.begin(), dst.end(), 0.0);
      for (int j = 0; j < size; ++j) {
        const double g = rotation(base + i, base + j);
        if (g == 0.0) continue;
        const auto src = in.channel(base + j);
        for (size_t n = 0; n < frames; ++n) dst[n] += g * src[n];
      }
    }
  }
}

AudioBlock ApplyRotation(const ShRotationMatrix& rotation,
                         const AudioBlock& in) {
  AudioBlock out(in.channels(), in.frames());
  ApplyRotation(rotation, in, out);
  return out;
}

}  // namespace auralab
