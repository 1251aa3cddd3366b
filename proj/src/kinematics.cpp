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

#include "toolkin/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include "json.hpp"

#include "toolkin/error.hpp"
#include "toolkin/parallel.hpp"

namespace toolkin::kin {
namespace {

using json = nlohmann::json;

constexpr std::string_view kDefaultChainJson = R"({
  "base_pose": {"position": [0.0, 0.0, 0.0], "orientation": [1.0, 0.0, 0.0, 0.0]},
  "joints": [
    {"axis": [0, 0, 1], "offset": [0, 0, 0.15], "limits": [-2.9, 2.9], "max_speed": 0.25},
    {"axis": [0, 1, 0], "offset": [0, 0, 0.20], "limits": [-1.9, 1.9], "max_speed": 0.25},
    {"axis": [0, 0, 1], "offset": [0, 0, 0.20], "limits": [-2.9, 2.9], "max_speed": 0.25},
    {"axis": [0, 1, 0], "offset": [0, 0, 0.20], "limits": [-2.0, 2.0], "max_speed": 0.25},
    {"axis": [0, 0, 1], "offset": [0, 0, 0.10], "limits": [-2.9, 2.9], "max_speed": 0.25},
    {"axis": [0, 1, 0], "offset": [0, 0, 0.05], "limits": [-2.0, 2.0], "max_speed": 0.25},
    {"axis": [0, 0, 1], "offset": [0, 0, 0.02], "limits": [-3.0, 3.0], "max_speed": 0.25}
  ],
  "gripper_offset": [0, 0, 0.08]
}
)";

Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json write_vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void check_finite(const Vec3& v, const char* what) {
  if (!math::is_finite(v)) {
    throw Error(ErrorCode::kInvariantViolation, std::string(what) + " has non-finite components");
  }
}

struct Frames {
  std::array<Vec3, kNumJoints> origins;
  std::array<Vec3, kNumJoints> axes;
  Pose tip;
};

Frames forward_frames(const KinematicChain& chain, const JointVector& angles) {
  Frames f;
  Quat r = chain.base_pose.orientation;
  Vec3 p = chain.base_pose.position;
  for (int i = 0; i < kNumJoints; ++i) {
    const JointSpec& js = chain.joints[i];
    f.origins[i] = p;
    f.axes[i] = math::quat_rotate(r, js.axis);
    r = math::quat_multiply(r, math::quat_from_axis_angle(js.axis, angles[i]));
    p += math::quat_rotate(r, js.offset);
  }
  p += math::quat_rotate(r, chain.gripper_offset);
  f.tip = {p, r};
  return f;
}

bool converged(const Eigen::Matrix<double, 6, 1>& e, const IkSettings& s) {
  return e.head<3>().norm() <= s.pos_tol && e.tail<3>().norm() <= s.ori_tol;
}

// One damped-least-squares descent from `start`. Returns true on convergence.
bool dls_attempt(const KinematicChain& chain, const Pose& target, const JointVector& start,
                 const IkSettings& s, JointVector& out, IkTrace* trace) {
  constexpr double kMaxDamping = 1e3;
  constexpr double kMinDamping = 1e-4;
  constexpr double kMaxStep = 0.5;  // radians, per iteration

  JointVector theta = clamp_to_limits(chain, start);
  Eigen::Matrix<double, 6, 1> err = pose_error(target, forward(chain, theta));
  double err_sq = err.squaredNorm();
  double lambda = s.damping;

  for (int it = 0; it < s.max_iters; ++it) {
    if (converged(err, s)) break;
    // Joints pinned at a limit whose step would push further out are frozen
    // and the step is re-solved without them.
    Eigen::Matrix<double, 6, kNumJoints> jac = jacobian(chain, theta);
    Eigen::Matrix<double, kNumJoints, 1> step;
    for (int pass = 0; pass < kNumJoints; ++pass) {
      const Eigen::Matrix<double, 6, 6> a =
          jac * jac.transpose() + (lambda * lambda) * Eigen::Matrix<double, 6, 6>::Identity();
      step = jac.transpose() * a.ldlt().solve(err);
      bool frozen_any = false;
      for (int i = 0; i < kNumJoints; ++i) {
        const JointSpec& js = chain.joints[i];
        const bool out_low = theta[i] <= js.min && step(i) < 0.0;
        const bool out_high = theta[i] >= js.max && step(i) > 0.0;
        if ((out_low || out_high) && !jac.col(i).isZero()) {
          jac.col(i).setZero();
          frozen_any = true;
        }
      }
      if (!frozen_any) break;
    }
    const double step_norm = step.norm();
    if (step_norm > kMaxStep) step *= kMaxStep / step_norm;

    JointVector cand = theta;
    for (int i = 0; i < kNumJoints; ++i) cand[i] += step(i);
    cand = clamp_to_limits(chain, cand);
    const auto cand_err = pose_error(target, forward(chain, cand));
    const double cand_sq = cand_err.squaredNorm();
    if (cand_sq < err_sq) {
      theta = cand;
      err = cand_err;
      err_sq = cand_sq;
      lambda = std::max(lambda * 0.5, kMinDamping);
      if (trace) trace->accepted_error_sq.push_back(err_sq);
    } else {
      lambda *= 2.0;
      if (lambda > kMaxDamping) break;  // stalled
    }
  }
  out = theta;
  return converged(err, s);
}

}  // namespace

double KinematicChain::reach() const {
  double r = math::norm(gripper_offset);
  for (const auto& j : joints) r += math::norm(j.offset);
  return r;
}

KinematicChain load_chain(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  KinematicChain chain;
  try {
    const json& base = doc.at("base_pose");
    chain.base_pose.position = read_vec3(base.at("position"), "base_pose.position");
    const json& q = base.at("orientation");
    if (!q.is_array() || q.size() != 4) {
      throw Error(ErrorCode::kParseError, "base_pose.orientation must be [w,x,y,z]");
    }
    chain.base_pose.orientation =
        math::quat_normalize({q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                              q[3].get<double>()});
    const json& joints = doc.at("joints");
    if (!joints.is_array()) throw Error(ErrorCode::kParseError, "joints must be an array");
    if (joints.size() != kNumJoints) {
      throw Error(ErrorCode::kInvariantViolation,
                  "chain must have exactly 7 joints, got " + std::to_string(joints.size()));
    }
    for (int i = 0; i < kNumJoints; ++i) {
      const json& jj = joints[i];
      JointSpec& js = chain.joints[i];
      const Vec3 axis = read_vec3(jj.at("axis"), "joint axis");
      check_finite(axis, "joint axis");
      if (std::abs(math::norm(axis) - 1.0) > 1e-6) {
        throw Error(ErrorCode::kInvariantViolation, "joint axis must be unit length");
      }
      js.axis = axis / math::norm(axis);
      js.offset = read_vec3(jj.at("offset"), "joint offset");
      check_finite(js.offset, "joint offset");
      const json& lim = jj.at("limits");
      if (!lim.is_array() || lim.size() != 2) {
        throw Error(ErrorCode::kParseError, "joint limits must be [min,max]");
      }
      js.min = lim[0].get<double>();
      js.max = lim[1].get<double>();
      if (!(js.min < js.max)) {
        throw Error(ErrorCode::kInvariantViolation,
                    "joint " + std::to_string(i) + " limits need min < max");
      }
      js.max_speed = jj.value("max_speed", 0.25);
      if (!(js.max_speed > 0.0)) {
        throw Error(ErrorCode::kInvariantViolation, "joint max_speed must be positive");
      }
    }
    chain.gripper_offset = read_vec3(doc.at("gripper_offset"), "gripper_offset");
    check_finite(chain.gripper_offset, "gripper_offset");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!(chain.reach() > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation, "chain reach must be positive");
  }
  return chain;
}

std::string chain_to_json(const KinematicChain& chain) {
  json doc;
  const Quat& q = chain.base_pose.orientation;
  doc["base_pose"] = {{"position", write_vec3(chain.base_pose.position)},
                      {"orientation", json::array({q.w, q.x, q.y, q.z})}};
  json joints = json::array();
  for (const auto& js : chain.joints) {
    joints.push_back({{"axis", write_vec3(js.axis)},
                      {"offset", write_vec3(js.offset)},
                      {"limits", json::array({js.min, js.max})},
                      {"max_speed", js.max_speed}});
  }
  doc["joints"] = joints;
  doc["gripper_offset"] = write_vec3(chain.gripper_offset);
  return doc.dump(2);
}

std::string_view default_chain_json() { return kDefaultChainJson; }

const KinematicChain& default_chain() {
  static const KinematicChain chain = load_chain(kDefaultChainJson);
  return chain;
}

JointVector clamp_to_limits(const KinematicChain& chain, const JointVector& angles) {
  JointVector out;
  for (int i = 0; i < kNumJoints; ++i) {
    out[i] = std::clamp(angles[i], chain.joints[i].min, chain.joints[i].max);
  }
  return out;
}

bool within_limits(const KinematicChain& chain, const JointVector& angles) {
  for (int i = 0; i < kNumJoints; ++i) {
    if (angles[i] < chain.joints[i].min || angles[i] > chain.joints[i].max) return false;
  }
  return true;
}

Pose forward(const KinematicChain& chain, const JointVector& angles) {
  return forward_frames(chain, angles).tip;
}

Eigen::Matrix<double, 6, kNumJoints> jacobian(const KinematicChain& chain,
                                              const JointVector& angles) {
  const Frames f = forward_frames(chain, angles);
  Eigen::Matrix<double, 6, kNumJoints> jac;
  for (int i = 0; i < kNumJoints; ++i) {
    const Vec3 lin = math::cross(f.axes[i], f.tip.position - f.origins[i]);
    jac.col(i) << lin.x, lin.y, lin.z, f.axes[i].x, f.axes[i].y, f.axes[i].z;
  }
  return jac;
}

Pose tooltip_offset(const Pose& target, double tool_length) {
  if (tool_length < 0.0) {
    throw Error(ErrorCode::kNegativeLength, "tool length must be >= 0");
  }
  return {target.position - math::quat_rotate(target.orientation, {tool_length, 0.0, 0.0}),
          target.orientation};
}

Vec3 tooltip_position(const Pose& gripper, double tool_length) {
  return gripper.position + math::quat_rotate(gripper.orientation, {tool_length, 0.0, 0.0});
}

Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current) {
  const Vec3 dp = target.position - current.position;
  const Quat dq = math::quat_multiply(target.orientation, math::quat_inverse(current.orientation));
  const Vec3 rv = math::quat_to_rotation_vector(dq);
  Eigen::Matrix<double, 6, 1> e;
  e << dp.x, dp.y, dp.z, rv.x, rv.y, rv.z;
  return e;
}

bool try_solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkSettings& settings, JointVector& out, IkTrace* trace) {
  // Gripper positions farther from the first joint than the chain's total
  // length cannot be reached by any configuration.
  if (math::distance(target.position, chain.base_pose.position) > chain.reach()) {
    out = clamp_to_limits(chain, seed);
    return false;
  }
  std::mt19937_64 rng(settings.rng_seed);
  JointVector start = seed;
  for (int attempt = 0; attempt <= settings.restarts; ++attempt) {
    if (trace) ++trace->attempts;
    if (dls_attempt(chain, target, start, settings, out, trace)) return true;
    for (int i = 0; i < kNumJoints; ++i) {
      std::uniform_real_distribution<double> u(chain.joints[i].min, chain.joints[i].max);
      start[i] = u(rng);
    }
  }
  out = clamp_to_limits(chain, seed);
  return false;
}

JointVector solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                     const IkSettings& settings, IkTrace* trace) {
  JointVector out;
  if (!try_solve_ik(chain, target, seed, settings, out, trace)) {
    throw Error(ErrorCode::kUnreachable, "no IK solution within tolerance after all restarts");
  }
  return out;
}

JointVector solve_ik_tool(const KinematicChain& chain, const Pose& tooltip_target,
                          double tool_length, const JointVector& seed,
                          const IkSettings& settings) {
  return solve_ik(chain, tooltip_offset(tooltip_target, tool_length), seed, settings);
}

bool reachable(const KinematicChain& chain, const Pose& pose, const IkSettings& settings) {
  JointVector out;
  return try_solve_ik(chain, pose, JointVector{}, settings, out);
}

std::vector<bool> solve_ik_batch_serial(const KinematicChain& chain,
                                        const std::vector<Pose>& targets,
                                        const std::vector<JointVector>& seeds,
                                        const IkSettings& settings,
                                        std::vector<JointVector>& out) {
  if (targets.size() != seeds.size()) {
    throw Error(ErrorCode::kLengthMismatch, "targets and seeds differ in length");
  }
  out.assign(targets.size(), JointVector{});
  std::vector<bool> ok(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    IkSettings s = settings;
    s.rng_seed = derive_seed(settings.rng_seed, i);
    ok[i] = try_solve_ik(chain, targets[i], seeds[i], s, out[i]);
  }
  return ok;
}

std::vector<bool> solve_ik_batch(const KinematicChain& chain, const std::vector<Pose>& targets,
                                 const std::vector<JointVector>& seeds,
                                 const IkSettings& settings, std::vector<JointVector>& out) {
  if (targets.size() != seeds.size()) {
    throw Error(ErrorCode::kLengthMismatch, "targets and seeds differ in length");
  }
  out.assign(targets.size(), JointVector{});
  std::vector<char> flags(targets.size(), 0);
  parallel_for(targets.size(), [&](std::size_t i) {
    IkSettings s = settings;
    s.rng_seed = derive_seed(settings.rng_seed, i);
    flags[i] = try_solve_ik(chain, targets[i], seeds[i], s, out[i]) ? 1 : 0;
  });
  return {flags.begin(), flags.end()};
}

}  // namespace toolkin::kin
