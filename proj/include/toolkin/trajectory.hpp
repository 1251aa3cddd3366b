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

// Recorded gripper trajectories: rollout capture, cross-episode averaging,
// subsample-and-reachability smoothing, tool-length retargeting, and replay
// through the simulator by waypoint tracking.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toolkin/env.hpp"
#include "toolkin/kinematics.hpp"
#include "toolkin/rl/train.hpp"

namespace toolkin::traj {

using math::Pose;

struct Waypoint {
  int t = 0;  // step index
  Pose pose;  // gripper pose

  bool operator==(const Waypoint&) const = default;
};

struct Trajectory {
  double tool_length = 0;  // meters
  std::vector<Waypoint> waypoints;

  /// Throws kNegativeLength, kNonMonotoneTime or kNonUnitQuaternion.
  void validate() const;
  bool operator==(const Trajectory&) const = default;
};

/// Number of samples every averaged trajectory is resampled to.
inline constexpr int kAverageSamples = 100;

/// Seed of recording attempt i; disjoint from training and evaluation seeds.
std::uint64_t record_episode_seed(int i);

/// Rolls out the deterministic controller and records the gripper pose after
/// every step. With `complete_only`, episodes that miss the goal are skipped
/// and further seeds are tried, up to `max_attempts` in total (default
/// 10 * n); throws kInsufficientCompleteEpisodes when the cap is exhausted.
std::vector<Trajectory> record_rollouts(const rl::Controller& controller, const env::EnvSpec& spec,
                                        int n_episodes, bool complete_only, int max_attempts = 0);
std::vector<Trajectory> record_rollouts(const rl::Checkpoint& checkpoint, const env::EnvSpec& spec,
                                        int n_episodes, bool complete_only, int max_attempts = 0);

enum class AverageMode {
  kPhase,     // resample every episode to kAverageSamples points
  kTruncate,  // average per absolute step over the shortest episode
};

/// In phase mode, resamples each episode to kAverageSamples points over its
/// own duration (positions linearly, orientations by nearest sample) and
/// averages per index. Throws kEmptyList, or kLengthMismatch when tool
/// lengths differ.
Trajectory average_trajectory(const std::vector<Trajectory>& trajs, AverageMode mode = AverageMode::kPhase);

/// Keeps waypoints 0, k, 2k, ... and the last one, then drops any whose tool
/// tip, carried by a tool of `tool_length`, is not reachable. Waypoints are
/// renumbered from 1. Throws kAllWaypointsFiltered.
Trajectory smooth_filter(const Trajectory& traj, int subsample_k, const kin::KinematicChain& chain,
                         double tool_length, const kin::IkSettings& ik);

/// Shifts every gripper waypoint along its local tool axis so a tool of
/// `real_tool_length` traces the same tip path. Throws kNegativeLength.
Trajectory retarget(const Trajectory& traj, double real_tool_length);

/// Tool-tip position of every waypoint.
std::vector<math::Vec3> tooltip_path(const Trajectory& traj);

struct ReplayOptions {
  std::uint64_t seed = 0;  // environment reset seed
  int settle_steps = 3;    // extra tracking steps allowed per waypoint
  double pos_tol = 2e-3;   // waypoint counts as reached within these
  double ang_tol = 2e-2;
};

struct ReplayReport {
  double box_travel = 0;
  double final_box_goal_distance = 0;
  int waypoints_attempted = 0;
  int waypoints_reached = 0;
  int ik_failures = 0;
  int env_steps = 0;

  bool operator==(const ReplayReport&) const = default;
};

/// Drives the simulator through the waypoints with the trajectory's tool
/// length and the box at its nominal start. Between waypoints the tool tip
/// moves in straight substeps no larger than the per-step motion limits.
/// IK failures hold the arm and are counted.
ReplayReport replay(const Trajectory& traj, const env::EnvSpec& spec, const ReplayOptions& opt = {});

std::string report_to_json(const ReplayReport& r);
ReplayReport report_from_json(std::string_view text);

/// CSV with a `# tool_length=<m>` line and header `t,px,py,pz,qw,qx,qy,qz`;
/// 9 significant digits.
std::string export_csv(const Trajectory& traj);
/// Throws kParseError, kNonUnitQuaternion or kNonMonotoneTime.
Trajectory import_csv(std::string_view text);

}  // namespace toolkin::traj
