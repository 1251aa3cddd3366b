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
#include <array>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "toolkin/error.hpp"

namespace toolkin::math {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Independent oracle: rotation matrix from axis-angle (Rodrigues), with the
// axis-angle extracted from the quaternion directly.
Mat3 rodrigues(const Quat& q) {
  const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  Mat3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
  if (s < 1e-15) return m;
  const double angle = 2.0 * std::atan2(s, q.w);
  const double k[3] = {q.x / s, q.y / s, q.z / s};
  const double kx[3][3] = {{0, -k[2], k[1]}, {k[2], 0, -k[0]}, {-k[1], k[0], 0}};
  double kk[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) kk[i][j] += kx[i][l] * kx[l][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m[i][j] += std::sin(angle) * kx[i][j] + (1.0 - std::cos(angle)) * kk[i][j];
  return m;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) c[i][j] += a[i][l] * b[l][j];
  return c;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

// Shepperd's method.
Quat from_matrix(const Mat3& m) {
  const double tr = m[0][0] + m[1][1] + m[2][2];
  Quat q;
  if (tr > 0) {
    const double s = std::sqrt(tr + 1.0) * 2;
    q = {0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s};
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2;
    q = {(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s};
  } else if (m[1][1] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2;
    q = {(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s};
  } else {
    const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2;
    q = {(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s};
  }
  return q;
}

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return quat_normalize({n(rng), n(rng), n(rng), n(rng)});
}

Vec3 random_vec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

void expect_quat_near(const Quat& a, const Quat& b, double tol) {
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

const Quat kQuarterZ{std::cos(std::numbers::pi / 4), 0.0, 0.0, std::sin(std::numbers::pi / 4)};

TEST(QuatNormalize, ScalesToUnit) {
  expect_quat_near(quat_normalize({2, 0, 0, 0}), {1, 0, 0, 0}, 1e-15);
  expect_quat_near(quat_normalize({0, 0, 0, 2}), {0, 0, 0, 1}, 1e-15);
  const Quat q = quat_normalize({1, 2, 3, 4});
  EXPECT_NEAR(norm(q), 1.0, 1e-12);
  EXPECT_NEAR(q.x / q.w, 2.0, 1e-12);
}

TEST(QuatNormalize, ZeroThrows) {
  try {
    quat_normalize({0, 0, 0, 0});
    FAIL() << "expected ZeroQuaternion";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroQuaternion);
  }
}

TEST(QuatMultiply, IdentityAndInverse) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_quat(rng);
    expect_quat_near(quat_multiply(Quat::identity(), q), q, 1e-15);
    const Quat e = quat_multiply(q, quat_inverse(q));
    EXPECT_NEAR(quat_angle(e, Quat::identity()), 0.0, 1e-7);
  }
}

TEST(QuatMultiply, MatchesMatrixComposition) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Quat a = random_quat(rng);
    const Quat b = random_quat(rng);
    const Quat oracle = from_matrix(matmul(rodrigues(a), rodrigues(b)));
    EXPECT_LT(quat_angle(quat_multiply(a, b), oracle), 1e-7);
    // Component-wise agreement up to sign is the tighter statement.
    const Quat p = quat_multiply(a, b);
    const double s = dot(p, oracle) < 0 ? -1.0 : 1.0;
    EXPECT_NEAR(p.w, s * oracle.w, 1e-9);
    EXPECT_NEAR(p.x, s * oracle.x, 1e-9);
  }
}

TEST(QuatRotate, Examples) {
  const Vec3 v = quat_rotate(Quat::identity(), {0.175, 0, 0});
  EXPECT_DOUBLE_EQ(v.x, 0.175);
  EXPECT_DOUBLE_EQ(v.y, 0.0);
  const double L = 0.3;
  const Vec3 r = quat_rotate(kQuarterZ, {L, 0, 0});
  EXPECT_NEAR(r.x, 0.0, 1e-15);
  EXPECT_NEAR(r.y, L, 1e-15);
  EXPECT_NEAR(r.z, 0.0, 1e-15);
}

TEST(QuatRotate, AgreesWithRotationMatrixOracle) {
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Quat q = random_quat(rng);
    const Vec3 v = random_vec(rng);
    const Vec3 got = quat_rotate(q, v);
    const Vec3 want = mat_apply(rodrigues(q), v);
    worst = std::max({worst, std::abs(got.x - want.x), std::abs(got.y - want.y),
                      std::abs(got.z - want.z)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(QuatRotate, IsometryAndInverse) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const Quat q = random_quat(rng);
    const Vec3 v = random_vec(rng) * 3.0;
    const Vec3 r = quat_rotate(q, v);
    EXPECT_NEAR(norm(r), norm(v), 1e-9);
    const Vec3 back = quat_rotate(quat_inverse(q), r);
    EXPECT_NEAR(distance(back, v), 0.0, 1e-9);
  }
}

TEST(QuatToMatrix, MatchesOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Quat q = random_quat(rng);
    const auto m = quat_to_matrix(q);
    const Mat3 o = rodrigues(q);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(m[r * 3 + c], o[r][c], 1e-12);
  }
}

TEST(QuatAngle, Examples) {
  std::mt19937_64 rng(6);
  const Quat q = random_quat(rng);
  EXPECT_NEAR(quat_angle(q, q), 0.0, 1e-7);
  EXPECT_NEAR(quat_angle(q, -q), 0.0, 1e-7);
  EXPECT_NEAR(quat_angle(Quat::identity(), kQuarterZ), std::numbers::pi / 2, 1e-12);
  const Quat half{0, 0, 0, 1};
  EXPECT_NEAR(quat_angle(Quat::identity(), half), std::numbers::pi, 1e-12);
}

TEST(QuatRotationVector, RoundTrip) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Quat q = random_quat(rng);
    const Quat back = quat_from_rotation_vector(quat_to_rotation_vector(q));
    EXPECT_LT(quat_angle(q, back), 1e-7);
    EXPECT_LE(norm(quat_to_rotation_vector(q)), std::numbers::pi + 1e-12);
  }
}

// Oracle: principal eigenvector of Σ q qᵀ.
Quat eigen_average(const std::vector<Quat>& qs) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (const Quat& q : qs) {
    const Eigen::Vector4d v(q.w, q.x, q.y, q.z);
    m += v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  const Eigen::Vector4d e = es.eigenvectors().col(3);
  return {e(0), e(1), e(2), e(3)};
}

TEST(QuatAverage, Examples) {
  std::mt19937_64 rng(8);
  const Quat q = random_quat(rng);
  const std::vector<Quat> same{q, q, q};
  EXPECT_LT(quat_angle(quat_average(same), q), 1e-7);
  const std::vector<Quat> flipped{q, -q};
  const Quat avg = quat_average(flipped);
  EXPECT_LT(quat_angle(avg, q), 1e-7);
  EXPECT_GT(dot(avg, q), 0.0);
}

TEST(QuatAverage, EmptyThrows) {
  try {
    quat_average({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyList);
  }
}

TEST(QuatAverage, TightClusterMatchesEigenOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    const Quat center = random_quat(rng);
    std::vector<Quat> qs;
    for (int i = 0; i < 10; ++i) {
      const Quat d = quat_from_rotation_vector({n(rng), n(rng), n(rng)});
      Quat q = quat_multiply(d, center);
      if (i % 3 == 0) q = -q;
      qs.push_back(q);
    }
    EXPECT_LT(quat_angle(quat_average(qs), eigen_average(qs)), 1e-3);
  }
}

TEST(QuatAverage, InvariantToSignFlipsAndPermutation) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 0.1);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const Quat center = random_quat(rng);
    std::vector<Quat> qs;
    for (int i = 0; i < 8; ++i) {
      qs.push_back(quat_multiply(quat_from_rotation_vector({n(rng), n(rng), n(rng)}), center));
    }
    const Quat base = quat_average(qs);
    auto shuffled = qs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto& q : shuffled) {
      if (coin(rng)) q = -q;
    }
    EXPECT_LT(quat_angle(quat_average(shuffled), base), 1e-7);
  }
}

TEST(Pose, ComposeMatchesManualTransform) {
  std::mt19937_64 rng(11);
  const Pose a{random_vec(rng), random_quat(rng)};
  const Pose b{random_vec(rng), random_quat(rng)};
  const Pose c = compose(a, b);
  const Vec3 p = random_vec(rng);
  const Vec3 direct = c.position + quat_rotate(c.orientation, p);
  const Vec3 nested = a.position + quat_rotate(a.orientation, b.position + quat_rotate(b.orientation, p));
  EXPECT_NEAR(distance(direct, nested), 0.0, 1e-12);
}

}  // namespace
}  // namespace toolkin::math
