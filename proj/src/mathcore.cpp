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

#include "toolkin/mathcore.hpp"

#include <algorithm>
#include <numbers>

#include "toolkin/error.hpp"

namespace toolkin::math {

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

bool is_finite(const Quat& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

Quat quat_normalize(const Quat& q) {
  const double n = norm(q);
  if (!(n > 1e-12)) {
    throw Error(ErrorCode::kZeroQuaternion, "cannot normalize a quaternion of norm <= 1e-12");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  const Quat p{
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
  };
  return quat_normalize(p);
}

Vec3 quat_rotate(const Quat& q, const Vec3& v) {
  // Expanded form of q (0,v) q*: v + 2w(u×v) + 2u×(u×v), u = vector part.
  const Vec3 u{q.x, q.y, q.z};
  const Vec3 t = 2.0 * cross(u, v);
  return v + q.w * t + cross(u, t);
}

double quat_angle(const Quat& a, const Quat& b) {
  const double d = std::clamp(std::abs(dot(a, b)), -1.0, 1.0);
  return 2.0 * std::acos(d);
}

Quat quat_average(std::span<const Quat> qs) {
  if (qs.empty()) {
    throw Error(ErrorCode::kEmptyList, "quat_average needs at least one quaternion");
  }
  const Quat& ref = qs.front();
  Quat sum{0.0, 0.0, 0.0, 0.0};
  for (const Quat& q : qs) {
    const double s = dot(q, ref) < 0.0 ? -1.0 : 1.0;
    sum.w += s * q.w;
    sum.x += s * q.x;
    sum.y += s * q.y;
    sum.z += s * q.z;
  }
  const double n = static_cast<double>(qs.size());
  return quat_normalize({sum.w / n, sum.x / n, sum.y / n, sum.z / n});
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
  const double n = norm(axis);
  if (!(n > 1e-12)) {
    return Quat::identity();
  }
  const double s = std::sin(0.5 * angle) / n;
  return quat_normalize({std::cos(0.5 * angle), axis.x * s, axis.y * s, axis.z * s});
}

Vec3 quat_to_rotation_vector(const Quat& q) {
  // Pick the hemisphere with w >= 0 so the angle lies in [0, π].
  const Quat h = q.w < 0.0 ? -q : q;
  const Vec3 u{h.x, h.y, h.z};
  const double s = norm(u);
  if (s < 1e-12) {
    return 2.0 * u;  // first-order limit
  }
  const double angle = 2.0 * std::atan2(s, h.w);
  return u * (angle / s);
}

Quat quat_from_rotation_vector(const Vec3& rv) {
  const double angle = norm(rv);
  if (angle < 1e-12) {
    return quat_normalize({1.0, 0.5 * rv.x, 0.5 * rv.y, 0.5 * rv.z});
  }
  return quat_from_axis_angle(rv, angle);
}

std::array<double, 9> quat_to_matrix(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  return {
      1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
      2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y),
  };
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + quat_rotate(a.orientation, b.position),
          quat_multiply(a.orientation, b.orientation)};
}

}  // namespace toolkin::math
