// Copyright 2026 The Toolkin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Vector and quaternion algebra used for all pose arithmetic.
//
// Quaternions are stored and serialized in (w, x, y, z) order everywhere.

#pragma once

#include <array>
#include <cmath>
#include <span>

namespace toolkin::math {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
bool is_finite(const Vec3& v);

struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
  constexpr Quat operator-() const { return {-w, -x, -y, -z}; }
  constexpr bool operator==(const Quat&) const = default;
};

constexpr double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double norm(const Quat& q) { return std::sqrt(dot(q, q)); }
constexpr Quat conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }
bool is_finite(const Quat& q);

/// Scales q to unit norm. Throws ErrorCode::kZeroQuaternion when ‖q‖ ≤ 1e-12.
Quat quat_normalize(const Quat& q);

/// Hamilton product a*b (apply b first, then a), renormalized.
Quat quat_multiply(const Quat& a, const Quat& b);

/// Inverse of a unit quaternion (its conjugate).
inline Quat quat_inverse(const Quat& q) { return conjugate(q); }

/// v' = q v q⁻¹ for unit q.
Vec3 quat_rotate(const Quat& q, const Vec3& v);

/// Geodesic angle between two rotations, in [0, π]; q and −q are the same rotation.
double quat_angle(const Quat& a, const Quat& b);

/// Sign-aligned normalized mean. Valid for clustered rotations: every element
/// is flipped to agree in sign with the first before averaging.
Quat quat_average(std::span<const Quat> qs);

Quat quat_from_axis_angle(const Vec3& axis, double angle);

/// Rotation vector (axis × angle, angle in [0, π]) of a unit quaternion.
Vec3 quat_to_rotation_vector(const Quat& q);
Quat quat_from_rotation_vector(const Vec3& rv);

/// Row-major 3×3 rotation matrix of a unit quaternion.
std::array<double, 9> quat_to_matrix(const Quat& q);

struct Pose {
  Vec3 position;
  Quat orientation;

  constexpr bool operator==(const Pose&) const = default;
};

/// Composition a∘b: the pose b expressed in a's frame, mapped to the world.
Pose compose(const Pose& a, const Pose& b);

}  // namespace toolkin::math
