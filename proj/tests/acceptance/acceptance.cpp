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
// Acceptance run: one PASS/FAIL line per criterion, preceded by indented
// detail lines. Training criteria take tens of minutes on one core.
//
//   acceptance [--only N]... [--steps 150000] [--workdir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/fd_check.hpp"
#include "CLI11.hpp"
#include "toolkin/cli.hpp"
#include "toolkin/error.hpp"
#include "toolkin/kinematics.hpp"
#include "toolkin/rl/algos.hpp"
#include "toolkin/rl/train.hpp"
#include "toolkin/toolvision.hpp"
#include "toolkin/trajectory.hpp"

namespace {

using namespace toolkin;
namespace fs = std::filesystem;
using rl::MatrixXd;
using rl::VectorXd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

bool verdict(int n, const char* name, bool pass) {
  std::printf("criterion %d %s: %s\n", n, name, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
  return pass;
}

// ------------------------------------------------------------------ 1

bool extended_ik(std::mt19937_64& rng) {
  const auto t0 = Clock::now();
  const kin::KinematicChain& chain = kin::default_chain();
  const kin::IkSettings ik;
  double worst = 0;
  int failures = 0;
  for (int i = 0; i < 500; ++i) {
    const double len = i % 2 ? 0.175 : 0.125;
    kin::JointVector q;
    for (int j = 0; j < kin::kNumJoints; ++j) {
      const auto& js = chain.joints[j];
      q[j] = std::uniform_real_distribution<double>(0.8 * js.min, 0.8 * js.max)(rng);
    }
    const math::Pose g = kin::forward(chain, q);
    const math::Pose tip{kin::tooltip_position(g, len), g.orientation};
    try {
      const kin::JointVector sol = kin::solve_ik_tool(chain, tip, len, kin::JointVector{}, ik);
      worst = std::max(worst, math::distance(kin::tooltip_position(kin::forward(chain, sol), len), tip.position));
    } catch (const Error&) {
      ++failures;
    }
  }
  std::normal_distribution<double> n;
  double identity = 0;
  for (int i = 0; i < 10000; ++i) {
    const math::Pose t{{n(rng), n(rng), n(rng)}, math::quat_normalize({n(rng), n(rng), n(rng), n(rng)})};
    const double len = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    identity = std::max(identity, math::distance(kin::tooltip_position(kin::tooltip_offset(t, len), len), t.position));
  }
  const double secs = seconds_since(t0);
  detail("500 targets: %d failures, worst tooltip error %.3g m (limit 1e-3)", failures, worst);
  detail("offset identity over 10000 poses: worst %.3g m (limit 1e-12); %.1f s (limit 60)", identity, secs);
  return verdict(1, "extended-IK accuracy", failures == 0 && worst < 1e-3 && identity <= 1e-12 && secs < 60);
}

// ------------------------------------------------------------------ 2

bool length_detection(std::mt19937_64& rng) {
  const auto t0 = Clock::now();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ratio = 0, sum_err = 0;
  for (int k = 0; k < 50; ++k) {
    const double truth = 0.10 + 0.15 * u(rng);
    const double mpp = truth / (150.0 + 250.0 * u(rng));  // tool spans 150 to 400 px
    std::array<double, 3> views{};
    for (int v = 0; v < 3; ++v) {
      const int w = 640, h = 480, size = 8 + static_cast<int>(12 * u(rng));
      const double px = truth / mpp;
      const double ang = 2 * std::numbers::pi * u(rng);
      // Keep the whole segment inside the frame with margin for the markers.
      const double dx = px * std::cos(ang), dy = px * std::sin(ang);
      const double margin = size + 4;
      const double cx = margin + std::abs(dx) / 2 + (w - 2 * margin - std::abs(dx)) * u(rng);
      const double cy = margin + std::abs(dy) / 2 + (h - 2 * margin - std::abs(dy)) * u(rng);
      const vision::Marker a{static_cast<int>(std::lround(cx - dx / 2)), static_cast<int>(std::lround(cy - dy / 2)), size, size};
      const vision::Marker b{static_cast<int>(std::lround(cx + dx / 2)), static_cast<int>(std::lround(cy + dy / 2)), size, size};
      vision::SynthOptions opt;
      opt.noise_seed = rng();
      views[v] = vision::measure_length(vision::synth_tool_image(w, h, a, b, opt).image, {}, mpp);
    }
    const double err = std::abs(vision::average_length(views).length - truth);
    sum_err += err;
    worst_ratio = std::max(worst_ratio, err / std::max(2 * mpp, 0.01 * truth));
  }
  const double secs = seconds_since(t0);
  detail("50 triples: mean error %.3g m, worst error / allowance %.3f; %.1f s (limit 30)", sum_err / 50, worst_ratio,
         secs);
  return verdict(2, "tool-length detection", worst_ratio <= 1.0 && secs < 30);
}

// ------------------------------------------------------------------ 3

struct Trained {
  rl::Checkpoint ckpt;
  rl::EvalResult eval;
};

struct Runs {
  long steps = 150000;
  fs::path workdir;
  std::map<std::pair<std::string, int>, Trained> cache;

  const Trained& get(rl::Algo algo, int seed) {
    const auto key = std::make_pair(rl::to_string(algo), seed);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const auto t0 = Clock::now();
    rl::AlgoConfig cfg;
    cfg.total_steps = steps;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const env::EnvSpec spec;
    Trained t;
    t.ckpt = rl::train(algo, spec, cfg);
    t.eval = rl::evaluate(t.ckpt, spec, 100);
    const std::string stem = key.first + "_seed" + std::to_string(seed);
    rl::save_checkpoint(t.ckpt, (workdir / (stem + ".json")).string());
    std::string curve = "step,mean_return\n";
    for (const auto& [s, r] : t.ckpt.curve) curve += std::to_string(static_cast<long>(s)) + "," + std::to_string(r) + "\n";
    cli::write_text(workdir / (stem + "_curve.csv"), curve);
    detail("%-4s seed %d: distance %.4f m, travel %.4f m, success %.2f, return %.2f (%.0f s)", key.first.c_str(), seed,
           t.eval.mean_final_distance, t.eval.mean_travel, t.eval.success_rate, t.eval.mean_return, seconds_since(t0));
    return cache.emplace(key, std::move(t)).first->second;
  }
};

bool desk_training(Runs& runs) {
  std::string table = "algo,seed,mean_final_distance_m,mean_travel_m,success_rate,mean_return\n";
  bool a = true, b = true;
  int c = 0;
  for (int seed = 1; seed <= 3; ++seed) {
    const auto& ppo = runs.get(rl::Algo::kPpo, seed).eval;
    const auto& a2c = runs.get(rl::Algo::kA2c, seed).eval;
    const auto& trpo = runs.get(rl::Algo::kTrpo, seed).eval;
    const auto& ddpg = runs.get(rl::Algo::kDdpg, seed).eval;
    a = a && ppo.mean_final_distance <= 0.15 && ppo.mean_travel >= 0.10;
    b = b && ppo.mean_final_distance < std::min(a2c.mean_final_distance, ddpg.mean_final_distance);
    c += ppo.mean_final_distance <= trpo.mean_final_distance ? 1 : 0;
    for (const auto& [name, e] : {std::pair{"ppo", ppo}, {"a2c", a2c}, {"trpo", trpo}, {"ddpg", ddpg}}) {
      char line[160];
      std::snprintf(line, sizeof line, "%s,%d,%.6f,%.6f,%.2f,%.4f\n", name, seed, e.mean_final_distance, e.mean_travel,
                    e.success_rate, e.mean_return);
      table += line;
    }
  }
  cli::write_text(runs.workdir / "training_summary.csv", table);
  detail("(a) PPO distance <= 0.15 m and travel >= 0.10 m on every seed: %s", a ? "yes" : "no");
  detail("(b) PPO distance < min(A2C, DDPG) on every seed: %s", b ? "yes" : "no");
  detail("(c) PPO <= TRPO on %d of 3 seeds (need 2)", c);
  return verdict(3, "desk-scale training", a && b && c >= 2);
}

// ------------------------------------------------------------------ 4

bool tool_length_robustness(Runs& runs) {
  const rl::Checkpoint& ppo = runs.get(rl::Algo::kPpo, 1).ckpt;
  const env::EnvSpec spec = ppo.env;
  const auto trajs = traj::record_rollouts(ppo, spec, 100, true);
  const traj::Trajectory avg = traj::average_trajectory(trajs);
  const traj::Trajectory smooth = traj::smooth_filter(avg, 5, spec.chain, 0.125, spec.tracking_ik);
  const traj::Trajectory shorter = traj::retarget(smooth, 0.125);
  const auto pa = traj::tooltip_path(smooth), pb = traj::tooltip_path(shorter);
  double drift = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) drift = std::max(drift, math::distance(pa[i], pb[i]));
  const traj::ReplayReport ra = traj::replay(smooth, spec);
  const traj::ReplayReport rb = traj::replay(shorter, spec);
  cli::write_text(runs.workdir / "ppo_traj_0175.csv", traj::export_csv(smooth));
  cli::write_text(runs.workdir / "ppo_traj_0125.csv", traj::export_csv(shorter));
  cli::write_text(runs.workdir / "replay_0175.json", traj::report_to_json(ra));
  cli::write_text(runs.workdir / "replay_0125.json", traj::report_to_json(rb));
  const double diff = std::abs(ra.box_travel - rb.box_travel);
  detail("%zu waypoints after smoothing; tooltip drift under retargeting %.3g m (limit 1e-12)", smooth.waypoints.size(),
         drift);
  detail("travel L=0.175: %.4f m, L=0.125: %.4f m, difference %.4f m (limit 0.01)", ra.box_travel, rb.box_travel, diff);
  detail("IK failures %d / %d, waypoints reached %d / %d and %d / %d", ra.ik_failures, rb.ik_failures,
         ra.waypoints_reached, ra.waypoints_attempted, rb.waypoints_reached, rb.waypoints_attempted);
  return verdict(4, "variable-tool-length robustness", diff <= 0.01 && drift <= 1e-12);
}

// ------------------------------------------------------------------ 5

bool fine_tuning(Runs& runs) {
  const long fine_steps = runs.steps / 5;  // 30k at the default budget
  env::EnvSpec env3;
  env3.variant = env::Variant::kEnv3;
  int wins = 0;
  for (int seed = 1; seed <= 3; ++seed) {
    const auto t0 = Clock::now();
    rl::AlgoConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.total_steps = fine_steps;
    const rl::Checkpoint fine = rl::train_from(runs.get(rl::Algo::kPpo, seed).ckpt, rl::Algo::kPpo, env3, cfg);
    cfg.total_steps = runs.steps + fine_steps;
    const rl::Checkpoint scratch = rl::train(rl::Algo::kPpo, env3, cfg);
    const rl::EvalResult ef = rl::evaluate(fine, env3, 100);
    const rl::EvalResult es = rl::evaluate(scratch, env3, 100);
    wins += ef.mean_return >= es.mean_return ? 1 : 0;
    detail("seed %d: fine-tuned return %.3f (distance %.4f m), from scratch %.3f (distance %.4f m) (%.0f s)", seed,
           ef.mean_return, ef.mean_final_distance, es.mean_return, es.mean_final_distance, seconds_since(t0));
  }
  detail("fine-tuned >= from scratch on %d of 3 seeds (need 2)", wins);
  return verdict(5, "fine-tuning", wins >= 2);
}

// ------------------------------------------------------------------ 6

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

rl::GaussianPolicy with_flat(const rl::GaussianPolicy& p, const VectorXd& flat) {
  rl::GaussianPolicy q = p;
  q.mean.params() = flat.head(p.mean.num_params());
  q.log_std = flat.tail(p.log_std.size());
  return q;
}

rl::RolloutBatch batch_from(const rl::GaussianPolicy& behaviour, Eigen::Index n, std::mt19937_64& rng) {
  rl::RolloutBatch b;
  b.obs = random_matrix(behaviour.mean.input_dim(), n, rng);
  b.mean_old = behaviour.mean.forward_batch(b.obs);
  b.log_std_old = behaviour.log_std;
  const VectorXd sd = behaviour.log_std.array().exp();
  b.actions = b.mean_old + (random_matrix(b.mean_old.rows(), n, rng).array().colwise() * sd.array()).matrix();
  b.logp_old = rl::gaussian_logprob(b.mean_old, behaviour.log_std, b.actions);
  b.advantages = random_matrix(n, 1, rng).col(0);
  b.returns = random_matrix(n, 1, rng).col(0);
  return b;
}

// Direct expansion of the GAE sum: A_t = sum_l (gamma lambda)^l delta_{t+l},
// truncated after the first episode end.
VectorXd gae_direct(const VectorXd& r, const VectorXd& v, const std::vector<bool>& d, double g, double l, double last) {
  const Eigen::Index n = r.size();
  VectorXd a = VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double w = 1;
    for (Eigen::Index k = t; k < n; ++k) {
      const double next = d[k] ? 0.0 : (k + 1 < n ? v(k + 1) : last);
      a(t) += w * (r(k) + g * next - v(k));
      if (d[k]) break;
      w *= g * l;
    }
  }
  return a;
}

bool numerical_core(std::mt19937_64& rng) {
  using testing::max_fd_rel_error;
  double mlp = 0;
  std::map<std::string, double> worst;
  const auto note = [&](const std::string& name, double e) { worst[name] = std::max(worst[name], e); };
  for (int k = 0; k < 20; ++k) {
    const int in = 2 + k % 5, hid = 3 + k % 4, out = 1 + k % 3;
    rl::Mlp net = rl::Mlp::random({in, hid, hid, out}, rng, 1.0);
    const MatrixXd x = random_matrix(in, 5, rng), up = random_matrix(out, 5, rng);
    const rl::MlpGradients g = rl::mlp_gradients(net, x, up);
    rl::Mlp probe = net;
    mlp = std::max(mlp, max_fd_rel_error(
                            [&](const VectorXd& p) {
                              probe.params() = p;
                              return (up.array() * probe.forward_batch(x).array()).sum();
                            },
                            net.params(), g.params));
    const Eigen::Map<const VectorXd> xin(x.data(), x.size());
    mlp = std::max(mlp, max_fd_rel_error(
                            [&](const VectorXd& v) {
                              return (up.array() * net.forward_batch(Eigen::Map<const MatrixXd>(v.data(), in, 5)).array()).sum();
                            },
                            xin, Eigen::Map<const VectorXd>(g.input.data(), g.input.size())));
  }
  for (int k = 0; k < 5; ++k) {
    rl::GaussianPolicy old(rl::Mlp::random({4, 6, 3}, rng, 1.0), -0.4);
    rl::GaussianPolicy p = with_flat(old, old.flat() + 0.1 * random_matrix(old.num_params(), 1, rng).col(0));
    // The clipped objective has kinks at ratio 1 +- eps where central
    // differences are no oracle; redraw batches that sit too close to one.
    rl::RolloutBatch b;
    for (bool near_kink = true; near_kink;) {
      b = batch_from(old, 32, rng);
      const VectorXd ratio =
          (rl::gaussian_logprob(p.mean.forward_batch(b.obs), p.log_std, b.actions) - b.logp_old).array().exp();
      near_kink = ((ratio.array() - 0.8).abs().minCoeff() < 1e-3) || ((ratio.array() - 1.2).abs().minCoeff() < 1e-3);
    }
    VectorXd g;
    rl::pg_loss(p, b, 0.01, &g);
    note("pg", max_fd_rel_error([&](const VectorXd& f) { return rl::pg_loss(with_flat(p, f), b, 0.01); }, p.flat(), g));
    rl::ppo_loss(p, b, 0.2, &g);
    note("ppo", max_fd_rel_error([&](const VectorXd& f) { return rl::ppo_loss(with_flat(p, f), b, 0.2); }, p.flat(), g));
    rl::surrogate(p, b, &g);
    note("surrogate", max_fd_rel_error([&](const VectorXd& f) { return rl::surrogate(with_flat(p, f), b); }, p.flat(), g));
    rl::mean_kl(p, b, &g);
    note("kl", max_fd_rel_error([&](const VectorXd& f) { return rl::mean_kl(with_flat(p, f), b); }, p.flat(), g));

    rl::Mlp value = rl::Mlp::random({4, 6, 1}, rng, 1.0), probe = value;
    rl::value_loss(value, b.obs, b.returns, &g);
    note("value", max_fd_rel_error([&](const VectorXd& f) { probe.params() = f; return rl::value_loss(probe, b.obs, b.returns); }, value.params(), g));

    rl::Mlp q = rl::Mlp::random({7, 6, 1}, rng, 1.0), actor = rl::Mlp::random({4, 6, 3}, rng, 1.0);
    rl::Mlp qp = q, ap = actor;
    const MatrixXd act = random_matrix(3, 16, rng), obs = random_matrix(4, 16, rng);
    const VectorXd y = random_matrix(16, 1, rng).col(0);
    rl::q_loss(q, obs, act, y, &g);
    note("q", max_fd_rel_error([&](const VectorXd& f) { qp.params() = f; return rl::q_loss(qp, obs, act, y); }, q.params(), g));
    rl::actor_loss(actor, q, obs, &g);
    note("actor", max_fd_rel_error([&](const VectorXd& f) { ap.params() = f; return rl::actor_loss(ap, q, obs); }, actor.params(), g));
  }

  std::normal_distribution<double> n;
  double rot = 0;
  for (int i = 0; i < 10000; ++i) {
    const math::Quat q = math::quat_normalize({n(rng), n(rng), n(rng), n(rng)});
    const math::Vec3 v{n(rng), n(rng), n(rng)};
    const auto m = math::quat_to_matrix(q);
    const math::Vec3 ref{m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                         m[6] * v.x + m[7] * v.y + m[8] * v.z};
    rot = std::max(rot, math::distance(math::quat_rotate(q, v), ref));
  }

  double gae = 0;
  std::bernoulli_distribution done(0.1);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index len = 1 + k * 3;
    const VectorXd r = random_matrix(len, 1, rng).col(0), v = random_matrix(len, 1, rng).col(0);
    std::vector<bool> d(static_cast<std::size_t>(len));
    for (auto&& e : d) e = done(rng);
    const double g = 0.9 + 0.1 * (k % 2), l = 0.5 + 0.01 * k, last = n(rng);
    const rl::Advantages adv = rl::compute_advantages(r, v, d, g, l, last);
    gae = std::max(gae, (adv.advantages - gae_direct(r, v, d, g, l, last)).cwiseAbs().maxCoeff());
  }

  int accepted = 0, rejected = 0, violations = 0;
  rl::AlgoConfig cfg;
  for (int k = 0; k < 60; ++k) {
    rl::GaussianPolicy p(rl::Mlp::random({5, 8, 3}, rng, 1.0), -0.5);
    rl::RolloutBatch b = batch_from(p, 64, rng);
    const rl::GaussianPolicy before = p;
    const rl::UpdateStats s = rl::trpo_policy_step(p, b, cfg);
    if (s.accepted) {
      ++accepted;
      if (rl::mean_kl(p, b) > cfg.trpo_delta) ++violations;
    } else {
      ++rejected;
      if (!(p == before)) ++violations;
    }
  }

  detail("MLP gradients vs central differences, 20 nets: worst relative error %.3g (limit 1e-4)", mlp);
  double losses = 0;
  for (const auto& [name, e] : worst) {
    detail("%s loss gradient vs central differences: worst relative error %.3g (limit 1e-4)", name.c_str(), e);
    losses = std::max(losses, e);
  }
  detail("quaternion rotation vs matrix: worst %.3g (limit 1e-9)", rot);
  detail("GAE vs direct sum: worst %.3g (limit 1e-10)", gae);
  detail("TRPO steps: %d accepted, %d rejected, %d violations of KL <= delta or bit-identity", accepted, rejected,
         violations);
  return verdict(6, "numerical core", mlp < 1e-4 && losses < 1e-4 && rot < 1e-9 && gae < 1e-10 && violations == 0 &&
                                          accepted > 0);
}

// ------------------------------------------------------------------ 7

bool determinism(const fs::path& workdir) {
  const fs::path dir = workdir / "determinism";
  fs::create_directories(dir);
  const auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "toolkin");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (rc != 0) detail("command failed (%d): %s", rc, err.str().c_str());
    return out.str();
  };
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  int checked = 0, differing = 0;
  const auto same = [&](const std::string& a, const std::string& b) {
    ++checked;
    if (cli::read_text(a) != cli::read_text(b)) {
      ++differing;
      detail("differs: %s vs %s", a.c_str(), b.c_str());
    }
  };
  for (const std::string algo : {"a2c", "trpo", "ppo", "ddpg"}) {
    for (const char* tag : {"1", "2"}) {
      run({"train", "--algo", algo, "--env", "env1", "--steps", "3072", "--seed", "11", "--out",
           p(algo + tag + ".json")});
      run({"eval", "--ckpt", p(algo + tag + ".json"), "--episodes", "20", "--out", p(algo + tag + "_eval.csv")});
      run({"export-traj", "--ckpt", p(algo + tag + ".json"), "--episodes", "10", "--out", p(algo + tag + "_traj.csv")});
      run({"replay", "--traj", p(algo + tag + "_traj.csv"), "--report", p(algo + tag + "_replay.json")});
    }
    for (const char* suffix : {".json", "_curve.csv", "_eval.csv", "_traj.csv", "_replay.json"}) {
      same(p(algo + "1" + suffix), p(algo + "2" + suffix));
    }
  }
  detail("%d artifact pairs compared, %d differ", checked, differing);
  return verdict(7, "determinism", checked == 20 && differing == 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  Runs runs;
  std::string workdir = "acceptance_artifacts";
  app.add_option("--only", only, "run just these criteria")->check(CLI::Range(1, 7));
  app.add_option("--steps", runs.steps, "training budget per run")->capture_default_str();
  app.add_option("--workdir", workdir, "where checkpoints and reports are written")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  runs.workdir = workdir;
  fs::create_directories(runs.workdir);

  const auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  std::mt19937_64 rng(20260101);
  bool all = true;
  try {
    if (wanted(1)) all = extended_ik(rng) && all;
    if (wanted(2)) all = length_detection(rng) && all;
    if (wanted(6)) all = numerical_core(rng) && all;
    if (wanted(7)) all = determinism(runs.workdir) && all;
    if (wanted(3)) all = desk_training(runs) && all;
    if (wanted(4)) all = tool_length_robustness(runs) && all;
    if (wanted(5)) all = fine_tuning(runs) && all;
  } catch (const std::exception& e) {
    std::printf("aborted: %s\nFAIL\n", e.what());
    return 1;
  }
  return all ? 0 : 1;
}
