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


// Rotation of real spherical-harmonic (ambisonic) signals.
//
// Orientation is the listener's head pose: the unit quaternion that maps
// head-frame vectors into the room frame (right-handed, +x front, +y left,
// +z up). The rotation matrix built from it re-expresses a room-frame sound
// field in head coordinates, i.e. it counter-rotates the scene so sources
// stay fixed in the room while the head turns:
//
//   R * Y(d) == Y(Q^T d)   for every direction d,
//
// with Q the 3x3 matrix of the quaternion and Y the real SH vector in ACN
// order. SN3D and N3D differ only by a per-order scale, which commutes with
// the per-order blocks of R, so one matrix serves both conventions.

#ifndef AURALAB_SH_ROTATION_H_
#define AURALAB_SH_ROTATION_H_

#include <array>
#include <optional>

#include "auralab/audio_block.h"

namespace auralab {

using Matrix3 = std::array<std::array<double, 3>, 3>;

inline constexpr int kMaxShOrder = 3;
inline constexpr int kMaxShDim = (kMaxShOrder + 1) * (kMaxShOrder + 1);

struct Orientation {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Orientation Identity() { return {}; }
  // Normalizes; nullopt for non-finite or (near) zero-norm input.
  static std::optional<Orientation> FromQuaternion(double w, double x,
                                                   double y, double z);
  // Rotation by `radians` about the +z (up) axis; positive turns left.
  static Orientation FromYaw(double radians);
  static Orientation FromAxisAngle(double ax, double ay, double az,
                                   double radians);

  Matrix3 ToMatrix() const;
  bool operator==(const Orientation&) const = default;
};

// Fixed-capacity storage so rotations can be rebuilt on the audio thread.
class ShRotationMatrix {
 public:
  explicit ShRotationMatrix(int order = 1);

  int order() const { return order_; }
  int dim() const { return dim_; }
  double operator()(int row, int col) const { return m_[row * dim_ + col]; }
  double& operator()(int row, int col) { return m_[row * dim_ + col]; }

 private:
  int order_;
  int dim_;
  std::array<double, kMaxShDim * kMaxShDim> m_{};
};

// Order-by-order recurrence (Ivanic & Ruedenberg, with the published
// corrections) seeded from the first-order block. Throws kUnsupportedOrder
// outside 1..3.
ShRotationMatrix ComputeShRotation(const Orientation& orientation, int order);
// Same, writing into `out` without allocating. out.order() selects the order.
void ComputeShRotationInto(const Orientation& orientation,
                           ShRotationMatrix& out);

// out(:, n) = R * in(:, n) for every frame. in and out may not alias.
void ApplyRotation(const ShRotationMatrix& rotation, const AudioBlock& in,
                   AudioBlock& out);
AudioBlock ApplyRotation(const ShRotationMatrix& rotation,
                         const AudioBlock& in);

}  // namespace auralab

#endif  // AURALAB_SH_ROTATION_H_
