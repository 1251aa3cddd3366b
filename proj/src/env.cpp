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

#include "toolkin/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "json.hpp"

#include "toolkin/error.hpp"
#include "toolkin/parallel.hpp"

namespace toolkin::env {
namespace {

using json = nlohmann::json;

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Restricts t ∈ [t0, t1] to where the segment's coordinate on `axis` lies in
// [lo, hi]. Returns false when the restriction is empty.
bool clip_axis(const Segment& s, int axis, double lo, double hi, double& t0, double& t1) {
  const double a = s.a[axis];
  const double d = s.b[axis] - a;
  if (std::abs(d) < 1e-15) {
    return a >= lo && a <= hi && t0 <= t1;
  }
  double ta = (lo - a) / d;
  double tb = (hi - a) / d;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return t0 <= t1;
}

Vec3 point_at(const Segment& s, double t) { return s.a + (s.b - s.a) * t; }

struct Extent {
  bool valid = false;
  double lo = 0, hi = 0;
};

// Range of the segment's `axis` coordinate over the part lying inside the
// inflated box's slabs on the other two axes.
Extent axis_extent(const Segment& s, int axis, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 3; ++k) {
    if (k == axis) continue;
    if (!clip_axis(s, k, lo[k], hi[k], t0, t1)) return {};
  }
  const double v0 = point_at(s, t0)[axis];
  const double v1 = point_at(s, t1)[axis];
  return {true, std::min(v0, v1), std::max(v0, v1)};
}

Vec3 axis_unit(int axis, double sign) {
  Vec3 v;
  if (axis == 0) v.x = sign;
  else v.y = sign;
  return v;
}

Vec3 json_vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kEnv1: return "env1";
    case Variant::kEnv2: return "env2";
    case Variant::kEnv3: return "env3";
  }
  return "env1";
}

Variant parse_variant(std::string_view name) {
  if (name == "env1") return Variant::kEnv1;
  if (name == "env2") return Variant::kEnv2;
  if (name == "env3") return Variant::kEnv3;
  throw Error(ErrorCode::kInvalidSpec, "unknown environment '" + std::string(name) + "'");
}

void EnvSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidSpec, m); };
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (!(tool_length_sim >= 0.0)) fail("tool_length_sim must be >= 0");
  if (!(tool_radius >= 0.0)) fail("tool_radius must be >= 0");
  if (!(box_size.x > 0 && box_size.y > 0 && box_size.z > 0)) fail("box_size must be positive");
  if (!(max_dpos > 0.0 && max_dangle > 0.0)) fail("action limits must be positive");
  if (!(reset_noise >= 0.0)) fail("reset_noise must be >= 0");
  if (std::abs(math::norm(tool_orientation) - 1.0) > 1e-9) fail("tool_orientation must be unit");
}

std::string spec_to_json(const EnvSpec& s) {
  const auto v3 = [](const Vec3& v) { return json::array({v.x, v.y, v.z}); };
  json doc{
      {"variant", to_string(s.variant)},
      {"tool_length_sim", s.tool_length_sim},
      {"tool_radius", s.tool_radius},
      {"alpha", s.alpha},
      {"max_steps", s.max_steps},
      {"box_size", v3(s.box_size)},
      {"table_height", s.table_height},
      {"box_start", v3(s.box_start)},
      {"goal_offset_y", s.goal_offset_y},
      {"env3_extra_y", s.env3_extra_y},
      {"reset_noise", s.reset_noise},
      {"tip_start", v3(s.tip_start)},
      {"tool_orientation",
       json::array({s.tool_orientation.w, s.tool_orientation.x, s.tool_orientation.y,
                    s.tool_orientation.z})},
      {"max_dpos", s.max_dpos},
      {"max_dangle", s.max_dangle},
      {"quat_action_scale", s.quat_action_scale},
      {"quat_mode", s.quat_mode == QuatActionMode::kAdditive ? "additive" : "compose"},
      {"tracking_ik",
       {{"damping", s.tracking_ik.damping},
        {"pos_tol", s.tracking_ik.pos_tol},
        {"ori_tol", s.tracking_ik.ori_tol},
        {"max_iters", s.tracking_ik.max_iters},
        {"restarts", s.tracking_ik.restarts}}},
      {"chain", json::parse(kin::chain_to_json(s.chain))},
  };
  return doc.dump(2);
}

EnvSpec spec_from_json(std::string_view text) {
  EnvSpec s;
  try {
    const json doc = json::parse(text);
    if (doc.contains("variant")) s.variant = parse_variant(doc["variant"].get<std::string>());
    s.tool_length_sim = doc.value("tool_length_sim", s.tool_length_sim);
    s.tool_radius = doc.value("tool_radius", s.tool_radius);
    s.alpha = doc.value("alpha", s.alpha);
    s.max_steps = doc.value("max_steps", s.max_steps);
    if (doc.contains("box_size")) s.box_size = json_vec3(doc["box_size"]);
    s.table_height = doc.value("table_height", s.table_height);
    if (doc.contains("box_start")) s.box_start = json_vec3(doc["box_start"]);
    s.goal_offset_y = doc.value("goal_offset_y", s.goal_offset_y);
    s.env3_extra_y = doc.value("env3_extra_y", s.env3_extra_y);
    s.reset_noise = doc.value("reset_noise", s.reset_noise);
    if (doc.contains("tip_start")) s.tip_start = json_vec3(doc["tip_start"]);
    if (doc.contains("tool_orientation")) {
      const json& q = doc["tool_orientation"];
      s.tool_orientation = math::quat_normalize(
          {q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(), q.at(3).get<double>()});
    }
    s.max_dpos = doc.value("max_dpos", s.max_dpos);
    s.max_dangle = doc.value("max_dangle", s.max_dangle);
    s.quat_action_scale = doc.value("quat_action_scale", s.quat_action_scale);
    if (doc.contains("quat_mode")) {
      const std::string mode = doc["quat_mode"].get<std::string>();
      if (mode == "additive") s.quat_mode = QuatActionMode::kAdditive;
      else if (mode == "compose") s.quat_mode = QuatActionMode::kCompose;
      else throw Error(ErrorCode::kInvalidSpec, "quat_mode must be additive or compose");
    }
    if (doc.contains("tracking_ik")) {
      const json& ik = doc["tracking_ik"];
      s.tracking_ik.damping = ik.value("damping", s.tracking_ik.damping);
      s.tracking_ik.pos_tol = ik.value("pos_tol", s.tracking_ik.pos_tol);
      s.tracking_ik.ori_tol = ik.value("ori_tol", s.tracking_ik.ori_tol);
      s.tracking_ik.max_iters = ik.value("max_iters", s.tracking_ik.max_iters);
      s.tracking_ik.restarts = ik.value("restarts", s.tracking_ik.restarts);
    }
    if (doc.contains("chain")) s.chain = kin::load_chain(doc["chain"].dump());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  s.validate();
  return s;
}

Action scale_action(const EnvSpec& spec, std::span<const double> raw) {
  if (raw.size() != kActDim) {
    throw Error(ErrorCode::kDimensionMismatch, "actions have exactly 7 components");
  }
  Action a;
  a.dpos = Vec3{raw[0], raw[1], raw[2]} * spec.max_dpos;
  for (int i = 0; i < 4; ++i) a.dquat[i] = raw[3 + i] * spec.quat_action_scale;
  return a;
}

JointVector home_angles(const EnvSpec& spec) {
  const Pose tip{spec.tip_start, spec.tool_orientation};
  kin::IkSettings s;
  JointVector out;
  if (!kin::try_solve_ik(spec.chain, kin::tooltip_offset(tip, spec.tool_length_sim), JointVector{},
                         s, out)) {
    throw Error(ErrorCode::kInvalidSpec, "tool start pose is not reachable by the chain");
  }
  return out;
}

EnvState reset(const EnvSpec& spec, std::uint64_t seed) {
  spec.validate();
  EnvState st;
  st.rng_state = seed;
  const double jx = (2.0 * uniform01(st.rng_state) - 1.0) * spec.reset_noise;
  const double jy = (2.0 * uniform01(st.rng_state) - 1.0) * spec.reset_noise;
  st.box_pos = {spec.box_start.x + jx, spec.box_start.y + jy, spec.box_rest_z()};
  st.box_initial = st.box_pos;
  double offset = spec.goal_offset_y;
  if (spec.variant == Variant::kEnv3) offset += spec.env3_extra_y;
  st.goal_pos = st.box_pos + Vec3{0.0, offset, 0.0};
  st.joint_angles = home_angles(spec);
  st.gripper_pose = kin::forward(spec.chain, st.joint_angles);
  st.tooltip_pos = kin::tooltip_position(st.gripper_pose, spec.tool_length_sim);
  return st;
}

double reward(Variant variant, const Vec3& box, const Vec3& goal, const Vec3& tooltip) {
  if (variant == Variant::kEnv2) return -math::distance(box, goal);
  return -(math::distance(box, goal) + math::distance(box, tooltip));
}

bool goal_reached(const Vec3& box, const Vec3& goal, const Vec3& tooltip, double alpha) {
  return math::distance(box, goal) + math::distance(box, tooltip) <= alpha;
}

Vec3 push_resolve(const Vec3& box_center, const Vec3& box_size, const Segment& prev,
                  const Segment& now, double radius) {
  const Vec3 half = box_size * 0.5 + Vec3{radius, radius, radius};
  const Vec3 lo = box_center - half;
  const Vec3 hi = box_center + half;

  struct Candidate {
    int axis;
    double sign;
    double depth;
  };
  std::vector<Candidate> cands;
  for (int axis = 0; axis < 2; ++axis) {
    const Extent e = axis_extent(now, axis, lo, hi);
    if (!e.valid || e.hi <= lo[axis] || e.lo >= hi[axis]) {
      return box_center;  // no penetration
    }
    cands.push_back({axis, +1.0, e.hi - lo[axis]});
    cands.push_back({axis, -1.0, hi[axis] - e.lo});
  }

  // Prefer the face the tool was outside of before this step; then faces
  // that do not oppose the tool's horizontal motion; then any face.
  const auto separated_before = [&](const Candidate& c) {
    const Extent e = axis_extent(prev, c.axis, lo, hi);
    if (!e.valid) return false;
    return c.sign > 0 ? e.hi <= lo[c.axis] + 1e-9 : e.lo >= hi[c.axis] - 1e-9;
  };
  Vec3 motion = now.b - prev.b;
  motion.z = 0.0;
  const bool moving = math::norm(motion) > 1e-9;
  const auto not_opposing = [&](const Candidate& c) {
    return dot(axis_unit(c.axis, c.sign), motion) >= 0.0;
  };

  const Candidate* best = nullptr;
  for (int tier = 0; tier < 3 && !best; ++tier) {
    for (const Candidate& c : cands) {
      const bool eligible = tier == 0   ? separated_before(c)
                            : tier == 1 ? (moving && not_opposing(c))
                                        : true;
      if (eligible && c.depth > 0.0 && (!best || c.depth < best->depth)) best = &c;
    }
  }
  if (!best) return box_center;
  return box_center + axis_unit(best->axis, best->sign) * best->depth;
}

TrackResult track_pose(const EnvState& state, const Pose& desired, const EnvSpec& spec) {
  JointVector solved;
  if (!kin::try_solve_ik(spec.chain, desired, state.joint_angles, spec.tracking_ik, solved)) {
    return {state.joint_angles, true};
  }
  // Scale the whole joint step so the slowest-limited joint stays within its
  // speed bound; the motion keeps its direction in joint space.
  double scale = 1.0;
  for (int i = 0; i < kin::kNumJoints; ++i) {
    const double delta = std::abs(solved[i] - state.joint_angles[i]);
    const double limit = spec.chain.joints[i].max_speed;
    if (delta > limit) scale = std::min(scale, limit / delta);
  }
  JointVector next = state.joint_angles;
  for (int i = 0; i < kin::kNumJoints; ++i) {
    next[i] += scale * (solved[i] - state.joint_angles[i]);
  }
  return {next, false};
}

StepResult advance(const EnvState& state, const JointVector& angles, bool ik_failed,
                   const EnvSpec& spec) {
  StepResult r;
  EnvState& n = r.next_state;
  n = state;
  n.joint_angles = angles;
  for (int i = 0; i < kin::kNumJoints; ++i) {
    n.joint_velocities[i] = angles[i] - state.joint_angles[i];
  }
  n.gripper_pose = kin::forward(spec.chain, angles);
  n.tooltip_pos = kin::tooltip_position(n.gripper_pose, spec.tool_length_sim);
  n.box_pos = push_resolve(state.box_pos, spec.box_size, {state.gripper_pose.position, state.tooltip_pos},
                           {n.gripper_pose.position, n.tooltip_pos}, spec.tool_radius);
  n.box_pos.z = spec.box_rest_z();
  n.step_count = state.step_count + 1;

  r.reward = reward(spec.variant, n.box_pos, n.goal_pos, n.tooltip_pos);
  r.info.goal_reached = goal_reached(n.box_pos, n.goal_pos, n.tooltip_pos, spec.alpha);
  r.info.box_travel = math::distance(n.box_pos, n.box_initial);
  r.info.ik_failed = ik_failed;
  r.done = r.info.goal_reached || n.step_count >= spec.max_steps;
  return r;
}

StepResult step(const EnvState& state, const Action& action, const EnvSpec& spec) {
  Vec3 dpos = action.dpos;
  const double dn = math::norm(dpos);
  if (dn > spec.max_dpos) dpos = dpos * (spec.max_dpos / dn);

  const Quat& q = state.gripper_pose.orientation;
  const auto& d = action.dquat;
  Quat proposed = q;
  try {
    if (spec.quat_mode == QuatActionMode::kAdditive) {
      proposed = math::quat_normalize({q.w + d[0], q.x + d[1], q.y + d[2], q.z + d[3]});
    } else {
      proposed = math::quat_multiply(math::quat_normalize({1.0 + d[0], d[1], d[2], d[3]}), q);
    }
  } catch (const Error&) {
    proposed = q;  // delta cancelled the quaternion; keep the orientation
  }
  if (math::dot(proposed, q) < 0.0) proposed = -proposed;
  // Limit the rotation to max_dangle along the same axis.
  const Vec3 rel = math::quat_to_rotation_vector(math::quat_multiply(proposed, math::quat_inverse(q)));
  const double angle = math::norm(rel);
  if (angle > spec.max_dangle) {
    proposed = math::quat_multiply(math::quat_from_rotation_vector(rel * (spec.max_dangle / angle)), q);
  }

  const Pose desired{state.gripper_pose.position + dpos, proposed};
  const TrackResult tr = track_pose(state, desired, spec);
  return advance(state, tr.angles, tr.ik_failed, spec);
}

Observation observe(const EnvState& s) {
  Observation o{};
  std::size_t k = 0;
  const auto put = [&](const Vec3& v) {
    o[k++] = v.x;
    o[k++] = v.y;
    o[k++] = v.z;
  };
  put(s.goal_pos);
  put(s.box_pos);
  put(s.tooltip_pos);
  put(s.gripper_pose.position);
  o[k++] = s.gripper_pose.orientation.w;
  o[k++] = s.gripper_pose.orientation.x;
  o[k++] = s.gripper_pose.orientation.y;
  o[k++] = s.gripper_pose.orientation.z;
  for (double a : s.joint_angles) o[k++] = a;
  for (double v : s.joint_velocities) o[k++] = v;
  return o;
}

}  // namespace toolkin::env
