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

// Forward and inverse kinematics for a 7-joint serial arm, plus the tool-tip
// offset that lets a target for the tip of a gripped tool be turned into a
// target for the gripper.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "toolkin/mathcore.hpp"

namespace toolkin::kin {

using math::Pose;
using math::Quat;
using math::Vec3;

inline constexpr int kNumJoints = 7;

using JointVector = std::array<double, kNumJoints>;

struct JointSpec {
  Vec3 axis;       // unit rotation axis in the parent frame
  Vec3 offset;     // translation to the next joint, applied after the rotation
  double min = 0;  // radians
  double max = 0;
  double max_speed = 0;  // radians per simulator step
};

struct KinematicChain {
  Pose base_pose;
  std::array<JointSpec, kNumJoints> joints;
  Vec3 gripper_offset;

  /// Sum of link offset norms plus the gripper offset.
  double reach() const;
};

struct IkSettings {
  double damping = 0.1;
  double pos_tol = 1e-4;  // meters
  double ori_tol = 1e-3;  // radians
  int max_iters = 200;
  int restarts = 10;
  std::uint64_t rng_seed = 0;  // drives random restart seeds
};

/// Parses and validates a chain description (JSON, see README).
KinematicChain load_chain(std::string_view config_text);
std::string chain_to_json(const KinematicChain& chain);

/// The shipped generic 7-DOF arm (alternating z/y axes, about 1 m of reach).
const KinematicChain& default_chain();
std::string_view default_chain_json();

JointVector clamp_to_limits(const KinematicChain& chain, const JointVector& angles);
bool within_limits(const KinematicChain& chain, const JointVector& angles);

/// Gripper pose for the given joint angles.
Pose forward(const KinematicChain& chain, const JointVector& angles);

/// World-frame 6×7 geometric Jacobian of the gripper: rows 0-2 linear
/// velocity, rows 3-5 angular velocity.
Eigen::Matrix<double, 6, kNumJoints> jacobian(const KinematicChain& chain,
                                              const JointVector& angles);

/// Gripper pose that puts the tip of a tool of the given length (held along
/// the gripper's local x-axis) at `target`. Throws kNegativeLength.
Pose tooltip_offset(const Pose& target, double tool_length);

/// Tip position of a tool of the given length held by a gripper at `gripper`.
Vec3 tooltip_position(const Pose& gripper, double tool_length);

/// 6-vector pose error (position difference, rotation vector of the
/// orientation error), both expressed in the world frame.
Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current);

/// Squared error norms recorded by each accepted solver iteration.
struct IkTrace {
  std::vector<double> accepted_error_sq;
  int attempts = 0;
};

/// Damped least squares toward `target`, starting at `seed`, retrying from
/// random in-limit seeds on stall. Throws kUnreachable when every attempt fails.
JointVector solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                     const IkSettings& settings, IkTrace* trace = nullptr);

/// Non-throwing form of solve_ik; false when no attempt converged.
bool try_solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkSettings& settings, JointVector& out, IkTrace* trace = nullptr);

/// solve_ik for the gripper pose that places the tool tip at `tooltip_target`.
JointVector solve_ik_tool(const KinematicChain& chain, const Pose& tooltip_target,
                          double tool_length, const JointVector& seed,
                          const IkSettings& settings);

/// True iff solve_ik succeeds from the all-zero home seed (plus restarts).
bool reachable(const KinematicChain& chain, const Pose& pose, const IkSettings& settings);

/// Serial reference: solves each (target, seed) pair in order.
std::vector<bool> solve_ik_batch_serial(const KinematicChain& chain, const std::vector<Pose>& targets,
                                        const std::vector<JointVector>& seeds,
                                        const IkSettings& settings, std::vector<JointVector>& out);

/// Same contract as solve_ik_batch_serial, spread over the worker pool.
std::vector<bool> solve_ik_batch(const KinematicChain& chain, const std::vector<Pose>& targets,
                                 const std::vector<JointVector>& seeds, const IkSettings& settings,
                                 std::vector<JointVector>& out);

}  // namespace toolkin::kin
