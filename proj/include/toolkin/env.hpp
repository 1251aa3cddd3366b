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

// Quasi-static box-pushing simulator. The arm is commanded mocap-style: each
// action nudges the desired gripper pose and the arm follows through IK. A
// tool of fixed length is rigidly attached along the gripper's x-axis, and
// the box slides on the table only when the tool penetrates it.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "toolkin/kinematics.hpp"
#include "toolkin/mathcore.hpp"

namespace toolkin::env {

using kin::JointVector;
using math::Pose;
using math::Quat;
using math::Vec3;

enum class Variant { kEnv1, kEnv2, kEnv3 };

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);  // "env1" | "env2" | "env3"

enum class QuatActionMode {
  kAdditive,  // q' = normalize(q + dq)
  kCompose,   // q' = normalize(1 + dq) * q
};

inline constexpr int kObsDim = 30;
inline constexpr int kActDim = 7;

using Observation = std::array<double, kObsDim>;

struct EnvSpec {
  Variant variant = Variant::kEnv1;
  double tool_length_sim = 0.175;  // meters
  double tool_radius = 0.005;
  double alpha = 0.05;  // goal threshold, meters
  int max_steps = 100;
  Vec3 box_size{0.04, 0.04, 0.04};
  double table_height = -0.22;
  Vec3 box_start{0.42, -0.10, 0.0};  // z is ignored: the box rests on the table
  double goal_offset_y = 0.25;
  double env3_extra_y = 0.10;
  double reset_noise = 0.01;  // uniform jitter of the box start in x and y
  Vec3 tip_start{0.42, -0.16, -0.20};
  Quat tool_orientation{0.0, 0.70710678118654752, 0.70710678118654752, 0.0};
  double max_dpos = 0.05;    // meters per step
  double max_dangle = 0.2;   // radians per step
  double quat_action_scale = 0.05;  // policy units to quaternion components
  QuatActionMode quat_mode = QuatActionMode::kAdditive;
  kin::IkSettings tracking_ik{0.1, 1e-4, 1e-3, 50, 0, 0};
  kin::KinematicChain chain = kin::default_chain();

  void validate() const;  // throws kInvalidSpec
  double box_rest_z() const { return table_height + 0.5 * box_size.z; }
};

std::string spec_to_json(const EnvSpec& spec);
EnvSpec spec_from_json(std::string_view text);

struct EnvState {
  Vec3 goal_pos;
  Vec3 box_pos;
  Vec3 tooltip_pos;
  Pose gripper_pose;
  JointVector joint_angles{};
  JointVector joint_velocities{};
  int step_count = 0;
  std::uint64_t rng_state = 0;
  Vec3 box_initial;  // for travel bookkeeping; not observed

  bool operator==(const EnvState&) const = default;
};

struct Action {
  Vec3 dpos;                   // meters
  std::array<double, 4> dquat{};  // additive (w, x, y, z) delta
};

/// Maps a raw 7-vector from a policy to physical deltas.
Action scale_action(const EnvSpec& spec, std::span<const double> raw);

struct StepInfo {
  bool goal_reached = false;
  double box_travel = 0;  // meters from the episode's start position
  bool ik_failed = false;
};

struct StepResult {
  EnvState next_state;
  double reward = 0;
  bool done = false;
  StepInfo info;
};

/// Joint angles that put the tool tip at spec.tip_start.
JointVector home_angles(const EnvSpec& spec);

EnvState reset(const EnvSpec& spec, std::uint64_t seed);
StepResult step(const EnvState& state, const Action& action, const EnvSpec& spec);

/// Drives the arm one step toward a gripper pose: IK from the current
/// angles, per-joint change clamped by max_speed. On IK failure the arm holds.
struct TrackResult {
  JointVector angles;
  bool ik_failed = false;
};
TrackResult track_pose(const EnvState& state, const Pose& desired, const EnvSpec& spec);

/// Moves the arm to `angles` and resolves the resulting push; shared by
/// step() and trajectory replay.
StepResult advance(const EnvState& state, const JointVector& angles, bool ik_failed,
                   const EnvSpec& spec);

double reward(Variant variant, const Vec3& box, const Vec3& goal, const Vec3& tooltip);
bool goal_reached(const Vec3& box, const Vec3& goal, const Vec3& tooltip, double alpha);

struct Segment {
  Vec3 a;  // gripper end
  Vec3 b;  // tool tip
};

/// Quasi-static planar push of an axis-aligned box (center, full size) by a
/// capsule of the given radius moving from `prev` to `now`. Returns the new
/// box center; z never changes.
Vec3 push_resolve(const Vec3& box_center, const Vec3& box_size, const Segment& prev,
                  const Segment& now, double radius);

/// [goal(3), box(3), tooltip(3), gripper pos(3), gripper quat wxyz(4),
///  joint angles(7), joint velocities(7)]
Observation observe(const EnvState& state);

}  // namespace toolkin::env
