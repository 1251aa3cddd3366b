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
#include "toolkin/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "toolkin/error.hpp"
#include "toolkin/parallel.hpp"

namespace toolkin::traj {
namespace {

using math::Quat;
using math::Vec3;

constexpr double kUnitTol = 1e-6;

struct Episode {
  Trajectory traj;
  bool success = false;
};

Episode run_episode(const rl::Controller& controller, const env::EnvSpec& spec, std::uint64_t seed) {
  Episode e;
  e.traj.tool_length = spec.tool_length_sim;
  env::EnvState s = env::reset(spec, seed);
  env::StepResult r;
  do {
    r = env::step(s, controller(s), spec);
    s = r.next_state;
    e.traj.waypoints.push_back({s.step_count, s.gripper_pose});
  } while (!r.done);
  e.success = r.info.goal_reached;
  return e;
}

// Rotation from a toward b scaled by s (geodesic interpolation).
Quat slerp(const Quat& a, Quat b, double s) {
  if (math::dot(a, b) < 0) b = -b;
  const Vec3 rv = math::quat_to_rotation_vector(math::quat_multiply(math::quat_inverse(a), b));
  return math::quat_multiply(a, math::quat_from_rotation_vector(rv * s));
}

double parse_double(std::string_view field, std::size_t line) {
  double v = 0;
  const char* end = field.data() + field.size();
  const auto [p, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

void Trajectory::validate() const {
  if (!(tool_length >= 0)) throw Error(ErrorCode::kNegativeLength, "tool length must be non-negative");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (i > 0 && waypoints[i].t <= waypoints[i - 1].t) {
      throw Error(ErrorCode::kNonMonotoneTime, "waypoint times must increase strictly (index " + std::to_string(i) + ")");
    }
    const Quat& q = waypoints[i].pose.orientation;
    if (!math::is_finite(q) || std::abs(math::norm(q) - 1.0) > kUnitTol) {
      throw Error(ErrorCode::kNonUnitQuaternion, "waypoint " + std::to_string(i) + " has a non-unit quaternion");
    }
    if (!math::is_finite(waypoints[i].pose.position)) {
      throw Error(ErrorCode::kParseError, "waypoint " + std::to_string(i) + " has a non-finite position");
    }
  }
}

std::uint64_t record_episode_seed(int i) { return 2000000u + static_cast<std::uint64_t>(i); }

std::vector<Trajectory> record_rollouts(const rl::Controller& controller, const env::EnvSpec& spec, int n_episodes,
                                        bool complete_only, int max_attempts) {
  if (n_episodes < 1) throw Error(ErrorCode::kConfigError, "at least one episode is required");
  spec.validate();
  const int cap = max_attempts > 0 ? max_attempts : 10 * n_episodes;
  std::vector<Trajectory> kept;
  int next = 0;
  while (static_cast<int>(kept.size()) < n_episodes && next < cap) {
    const int batch = std::min(n_episodes - static_cast<int>(kept.size()), cap - next);
    std::vector<Episode> eps(static_cast<std::size_t>(batch));
    parallel_for(eps.size(), [&](std::size_t i) {
      eps[i] = run_episode(controller, spec, record_episode_seed(next + static_cast<int>(i)));
    });
    next += batch;
    for (Episode& e : eps) {
      if (!complete_only || e.success) kept.push_back(std::move(e.traj));
    }
  }
  if (static_cast<int>(kept.size()) < n_episodes) {
    throw Error(ErrorCode::kInsufficientCompleteEpisodes,
                "only " + std::to_string(kept.size()) + " of " + std::to_string(n_episodes) +
                    " episodes reached the goal in " + std::to_string(cap) + " attempts");
  }
  return kept;
}

std::vector<Trajectory> record_rollouts(const rl::Checkpoint& checkpoint, const env::EnvSpec& spec, int n_episodes,
                                        bool complete_only, int max_attempts) {
  const rl::Controller policy = [&](const env::EnvState& s) {
    return env::scale_action(spec, rl::policy_action(checkpoint, env::observe(s)));
  };
  return record_rollouts(policy, spec, n_episodes, complete_only, max_attempts);
}

Trajectory average_trajectory(const std::vector<Trajectory>& trajs, AverageMode mode) {
  if (trajs.empty()) throw Error(ErrorCode::kEmptyList, "nothing to average");
  for (const Trajectory& t : trajs) {
    if (t.waypoints.empty()) throw Error(ErrorCode::kEmptyList, "cannot average an empty trajectory");
    if (t.tool_length != trajs.front().tool_length) {
      throw Error(ErrorCode::kLengthMismatch, "trajectories were recorded with different tool lengths");
    }
  }
  Trajectory out;
  out.tool_length = trajs.front().tool_length;
  const double m = static_cast<double>(trajs.size());
  std::vector<Quat> qs(trajs.size());
  if (mode == AverageMode::kTruncate) {
    std::size_t len = trajs.front().waypoints.size();
    for (const Trajectory& t : trajs) len = std::min(len, t.waypoints.size());
    for (std::size_t k = 0; k < len; ++k) {
      Vec3 sum;
      for (std::size_t e = 0; e < trajs.size(); ++e) {
        sum = sum + trajs[e].waypoints[k].pose.position;
        qs[e] = trajs[e].waypoints[k].pose.orientation;
      }
      out.waypoints.push_back({static_cast<int>(k) + 1, {sum * (1.0 / m), math::quat_average(qs)}});
    }
    return out;
  }
  for (int k = 0; k < kAverageSamples; ++k) {
    Vec3 sum;
    for (std::size_t e = 0; e < trajs.size(); ++e) {
      const auto& w = trajs[e].waypoints;
      const double u = static_cast<double>(k) * static_cast<double>(w.size() - 1) / (kAverageSamples - 1);
      const auto i0 = std::min(static_cast<std::size_t>(u), w.size() - 1);
      const std::size_t i1 = std::min(i0 + 1, w.size() - 1);
      const double f = u - static_cast<double>(i0);
      sum = sum + w[i0].pose.position * (1.0 - f) + w[i1].pose.position * f;
      qs[e] = w[static_cast<std::size_t>(std::lround(u))].pose.orientation;
    }
    out.waypoints.push_back({k + 1, {sum * (1.0 / m), math::quat_average(qs)}});
  }
  return out;
}

Trajectory smooth_filter(const Trajectory& traj, int subsample_k, const kin::KinematicChain& chain,
                         double tool_length, const kin::IkSettings& ik) {
  if (subsample_k < 1) throw Error(ErrorCode::kConfigError, "subsample step must be at least 1");
  if (tool_length < 0) throw Error(ErrorCode::kNegativeLength, "tool length must be non-negative");
  const std::size_t n = traj.waypoints.size();
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(subsample_k)) picked.push_back(i);
  if (n > 0 && picked.back() != n - 1) picked.push_back(n - 1);

  Trajectory out;
  out.tool_length = traj.tool_length;
  for (const std::size_t i : picked) {
    const Pose& p = traj.waypoints[i].pose;
    const Pose tip{kin::tooltip_position(p, traj.tool_length), p.orientation};
    if (kin::reachable(chain, kin::tooltip_offset(tip, tool_length), ik)) {
      out.waypoints.push_back({static_cast<int>(out.waypoints.size()) + 1, p});
    }
  }
  if (out.waypoints.empty()) throw Error(ErrorCode::kAllWaypointsFiltered, "no reachable waypoint survived filtering");
  return out;
}

Trajectory retarget(const Trajectory& traj, double real_tool_length) {
  if (!(real_tool_length >= 0)) throw Error(ErrorCode::kNegativeLength, "tool length must be non-negative");
  Trajectory out = traj;
  out.tool_length = real_tool_length;
  if (real_tool_length == traj.tool_length) return out;
  for (Waypoint& w : out.waypoints) {
    const Vec3 tip = kin::tooltip_position(w.pose, traj.tool_length);
    w.pose = kin::tooltip_offset({tip, w.pose.orientation}, real_tool_length);
  }
  return out;
}

std::vector<Vec3> tooltip_path(const Trajectory& traj) {
  std::vector<Vec3> out;
  out.reserve(traj.waypoints.size());
  for (const Waypoint& w : traj.waypoints) out.push_back(kin::tooltip_position(w.pose, traj.tool_length));
  return out;
}

ReplayReport replay(const Trajectory& traj, const env::EnvSpec& spec, const ReplayOptions& opt) {
  traj.validate();
  env::EnvSpec s = spec;
  s.tool_length_sim = traj.tool_length;
  s.reset_noise = 0.0;
  env::EnvState st = env::reset(s, opt.seed);
  ReplayReport rep;

  const auto drive = [&](const Vec3& tip, const Quat& q) {
    const env::TrackResult tr = env::track_pose(st, kin::tooltip_offset({tip, q}, s.tool_length_sim), s);
    if (tr.ik_failed) ++rep.ik_failures;
    st = env::advance(st, tr.angles, tr.ik_failed, s).next_state;
    ++rep.env_steps;
  };
  const auto reached = [&](const Pose& target) {
    return math::distance(st.gripper_pose.position, target.position) <= opt.pos_tol &&
           math::quat_angle(st.gripper_pose.orientation, target.orientation) <= opt.ang_tol;
  };

  for (const Waypoint& w : traj.waypoints) {
    ++rep.waypoints_attempted;
    const Vec3 tip0 = st.tooltip_pos;
    const Quat q0 = st.gripper_pose.orientation;
    const Vec3 tip1 = kin::tooltip_position(w.pose, s.tool_length_sim);
    const double moves = std::max({1.0, std::ceil(math::distance(tip0, tip1) / s.max_dpos - 1e-9),
                                   std::ceil(math::quat_angle(q0, w.pose.orientation) / s.max_dangle - 1e-9)});
    const int n = static_cast<int>(moves);
    for (int j = 1; j <= n; ++j) {
      const double f = static_cast<double>(j) / n;
      drive(tip0 + (tip1 - tip0) * f, slerp(q0, w.pose.orientation, f));
    }
    for (int j = 0; j < opt.settle_steps && !reached(w.pose); ++j) drive(tip1, w.pose.orientation);
    if (reached(w.pose)) ++rep.waypoints_reached;
  }
  rep.box_travel = math::distance(st.box_pos, st.box_initial);
  rep.final_box_goal_distance = math::distance(st.box_pos, st.goal_pos);
  return rep;
}

std::string report_to_json(const ReplayReport& r) {
  const nlohmann::json j{{"box_travel", r.box_travel},
                         {"final_box_goal_distance", r.final_box_goal_distance},
                         {"waypoints_attempted", r.waypoints_attempted},
                         {"waypoints_reached", r.waypoints_reached},
                         {"ik_failures", r.ik_failures},
                         {"env_steps", r.env_steps}};
  return j.dump(2) + "\n";
}

ReplayReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ReplayReport r;
    r.box_travel = j.at("box_travel").get<double>();
    r.final_box_goal_distance = j.at("final_box_goal_distance").get<double>();
    r.waypoints_attempted = j.at("waypoints_attempted").get<int>();
    r.waypoints_reached = j.at("waypoints_reached").get<int>();
    r.ik_failures = j.at("ik_failures").get<int>();
    r.env_steps = j.value("env_steps", 0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed replay report: ") + e.what());
  }
}

std::string export_csv(const Trajectory& traj) {
  traj.validate();
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# tool_length=%.9g\n", traj.tool_length);
  out += buf;
  out += "t,px,py,pz,qw,qx,qy,qz\n";
  for (const Waypoint& w : traj.waypoints) {
    const Vec3& p = w.pose.position;
    const Quat& q = w.pose.orientation;
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", w.t, p.x, p.y, p.z, q.w, q.x, q.y, q.z);
    out += buf;
  }
  return out;
}

Trajectory import_csv(std::string_view text) {
  Trajectory traj;
  bool have_length = false, have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "tool_length=";
      const std::string_view body = trim(line.substr(1));
      if (body.substr(0, key.size()) == key) {
        traj.tool_length = parse_double(trim(body.substr(key.size())), line_no);
        have_length = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "t,px,py,pz,qw,qx,qy,qz") {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected header t,px,py,pz,qw,qx,qy,qz");
      }
      have_header = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (;;) {
      const std::size_t c = rest.find(',');
      f.push_back(trim(rest.substr(0, c)));
      if (c == std::string_view::npos) break;
      rest = rest.substr(c + 1);
    }
    if (f.size() != 8) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected 8 fields");
    }
    int t = 0;
    const auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), t);
    if (ec != std::errc() || p != f[0].data() + f[0].size()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": bad step index");
    }
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = parse_double(f[static_cast<std::size_t>(i) + 1], line_no);
    traj.waypoints.push_back({t, {{v[0], v[1], v[2]}, {v[3], v[4], v[5], v[6]}}});
  }
  if (!have_length) throw Error(ErrorCode::kParseError, "missing '# tool_length=' line");
  if (!have_header) throw Error(ErrorCode::kParseError, "missing CSV header");
  if (traj.waypoints.empty()) throw Error(ErrorCode::kParseError, "trajectory has no waypoints");
  traj.validate();
  for (Waypoint& w : traj.waypoints) w.pose.orientation = math::quat_normalize(w.pose.orientation);
  return traj;
}

}  // namespace toolkin::traj
