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
#include <algorithm>
#include <cmath>

#include "toolkin/error.hpp"
#include "toolkin/parallel.hpp"
#include "toolkin/rl/train.hpp"

namespace toolkin::rl {
namespace {

using Raw = std::array<double, env::kActDim>;

VectorXd as_vector(const env::Observation& o) {
  return Eigen::Map<const VectorXd>(o.data(), env::kObsDim);
}

Raw clip_unit(const VectorXd& a) {
  Raw r;
  for (int i = 0; i < env::kActDim; ++i) r[i] = std::clamp(a(i), -1.0, 1.0);
  return r;
}

// Mean return of episodes finished since the previous sample, emitted every
// `interval` environment steps.
class CurveRecorder {
 public:
  CurveRecorder(long start, int interval, std::vector<std::array<double, 2>>& out)
      : next_(start + interval), interval_(interval), out_(out) {}

  void episode(double ret) {
    sum_ += ret;
    ++count_;
  }

  void at(long step) {
    while (step >= next_) {
      if (count_ > 0) last_ = sum_ / count_;
      if (count_ > 0 || has_last_) out_.push_back({static_cast<double>(next_), last_});
      has_last_ = has_last_ || count_ > 0;
      sum_ = 0;
      count_ = 0;
      next_ += interval_;
    }
  }

  double last() const { return last_; }

 private:
  long next_;
  int interval_;
  std::vector<std::array<double, 2>>& out_;
  double sum_ = 0;
  int count_ = 0;
  double last_ = 0;
  bool has_last_ = false;
};

struct Worker {
  env::EnvState state;
  std::mt19937_64 rng;
  double episode_return = 0;
};

struct WorkerRollout {
  std::vector<env::Observation> raw_obs;
  std::vector<VectorXd> obs;  // normalized network inputs
  std::vector<VectorXd> actions;
  std::vector<VectorXd> means;
  std::vector<double> logp;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<std::pair<std::size_t, VectorXd>> truncated;  // step index, final input
  VectorXd last_obs;
  std::vector<double> finished_returns;
};

void collect(const GaussianPolicy& policy, const RunningNorm& norm, const env::EnvSpec& spec, Worker& w,
             int steps, WorkerRollout& out) {
  out = WorkerRollout{};
  for (int t = 0; t < steps; ++t) {
    const env::Observation raw_obs = env::observe(w.state);
    const VectorXd o = norm.apply(as_vector(raw_obs));
    const PolicySample s = sample_action(policy, o, w.rng);
    const Raw raw = clip_unit(s.action);
    const env::StepResult r = env::step(w.state, env::scale_action(spec, raw), spec);
    out.raw_obs.push_back(raw_obs);
    out.obs.push_back(o);
    out.actions.push_back(s.action);
    out.means.push_back(s.mean);
    out.logp.push_back(s.logprob);
    out.rewards.push_back(r.reward);
    out.dones.push_back(r.done);
    w.episode_return += r.reward;
    if (r.done) {
      if (!r.info.goal_reached) {
        out.truncated.emplace_back(out.obs.size() - 1, norm.apply(as_vector(env::observe(r.next_state))));
      }
      out.finished_returns.push_back(w.episode_return);
      w.episode_return = 0;
      w.state = env::reset(spec, w.rng());
    } else {
      w.state = r.next_state;
    }
  }
  out.last_obs = norm.apply(as_vector(env::observe(w.state)));
}

double value_of(const Mlp& value, const VectorXd& o) { return value.forward(o)(0); }

RolloutBatch assemble(const OnPolicyLearner& l, std::vector<WorkerRollout>& parts, const AlgoConfig& cfg) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.obs.size();
  RolloutBatch b;
  const auto N = static_cast<Eigen::Index>(n);
  b.obs.resize(env::kObsDim, N);
  b.actions.resize(env::kActDim, N);
  b.mean_old.resize(env::kActDim, N);
  b.logp_old.resize(N);
  b.advantages.resize(N);
  b.returns.resize(N);
  b.log_std_old = l.policy.log_std;
  Eigen::Index col = 0;
  for (auto& p : parts) {
    const auto len = static_cast<Eigen::Index>(p.obs.size());
    for (Eigen::Index t = 0; t < len; ++t) {
      b.obs.col(col + t) = p.obs[static_cast<std::size_t>(t)];
      b.actions.col(col + t) = p.actions[static_cast<std::size_t>(t)];
      b.mean_old.col(col + t) = p.means[static_cast<std::size_t>(t)];
      b.logp_old(col + t) = p.logp[static_cast<std::size_t>(t)];
    }
    const VectorXd values = l.value.forward_batch(b.obs.middleCols(col, len)).row(0).transpose();
    VectorXd rewards = Eigen::Map<const VectorXd>(p.rewards.data(), len);
    // Time-limit ends are not true terminals: fold the bootstrap into the reward.
    for (const auto& [i, o] : p.truncated) rewards(static_cast<Eigen::Index>(i)) += cfg.gamma * value_of(l.value, o);
    const Advantages adv = compute_advantages(rewards, values, p.dones, cfg.gamma, cfg.gae_lambda,
                                              value_of(l.value, p.last_obs));
    b.advantages.segment(col, len) = adv.advantages;
    b.returns.segment(col, len) = adv.returns;
    col += len;
  }
  return b;
}

void check_compatible(const Checkpoint& init, const Checkpoint& fresh) {
  if (init.algo != fresh.algo) {
    throw Error(ErrorCode::kCheckpointMismatch, "initial checkpoint was trained with " +
                                                    to_string(init.algo) + ", not " + to_string(fresh.algo));
  }
  if (init.actor.sizes() != fresh.actor.sizes() || init.critic.sizes() != fresh.critic.sizes()) {
    throw Error(ErrorCode::kCheckpointMismatch, "initial checkpoint has a different network architecture");
  }
}

void train_on_policy(Checkpoint& c, const env::EnvSpec& spec, const AlgoConfig& cfg, const ProgressFn& progress) {
  std::mt19937_64 rng(cfg.seed);
  OnPolicyLearner l;
  l.policy.mean = c.actor;
  l.policy.log_std = c.log_std;
  l.value = c.critic;
  l.policy_opt = Adam(cfg.lr_policy);
  l.value_opt = Adam(cfg.lr_value);
  RunningNorm norm = c.obs_norm;

  const int nw = cfg.num_envs;
  std::vector<Worker> workers(static_cast<std::size_t>(nw));
  for (int i = 0; i < nw; ++i) {
    auto& w = workers[static_cast<std::size_t>(i)];
    w.rng.seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(i) + 1));
    w.state = env::reset(spec, w.rng());
  }
  int per_worker = std::max(1, cfg.rollout_horizon / nw);
  if (c.algo == Algo::kA2c && cfg.a2c_steps > 0) per_worker = cfg.a2c_steps;
  const long start = c.steps_trained;
  CurveRecorder curve(start, cfg.curve_interval, c.curve);
  long done_steps = 0;
  std::vector<WorkerRollout> parts(static_cast<std::size_t>(nw));
  while (done_steps < cfg.total_steps) {
    const long remaining = cfg.total_steps - done_steps;
    const int steps = static_cast<int>(std::min<long>(per_worker, (remaining + nw - 1) / nw));
    parallel_for(workers.size(),
                 [&](std::size_t i) { collect(l.policy, norm, spec, workers[i], steps, parts[i]); });
    done_steps += static_cast<long>(steps) * nw;
    for (const auto& p : parts) {
      for (double r : p.finished_returns) curve.episode(r);
    }
    const RolloutBatch batch = assemble(l, parts, cfg);
    if (cfg.normalize_obs) {
      MatrixXd raw(env::kObsDim, batch.size());
      Eigen::Index k = 0;
      for (const auto& p : parts) {
        for (const auto& o : p.raw_obs) raw.col(k++) = as_vector(o);
      }
      norm.update(raw);
    }
    switch (c.algo) {
      case Algo::kA2c: a2c_update(l, batch, cfg); break;
      case Algo::kPpo: ppo_update(l, batch, cfg, rng); break;
      case Algo::kTrpo: trpo_update(l, batch, cfg, rng); break;
      case Algo::kDdpg: break;
    }
    const std::size_t before = c.curve.size();
    curve.at(start + done_steps);
    if (progress && c.curve.size() != before) progress(start + done_steps, curve.last());
  }
  c.actor = l.policy.mean;
  c.log_std = l.policy.log_std;
  c.critic = l.value;
  c.obs_norm = norm;
  c.steps_trained = start + done_steps;
}

void train_ddpg(Checkpoint& c, const env::EnvSpec& spec, const AlgoConfig& cfg, const ProgressFn& progress) {
  std::mt19937_64 rng(cfg.seed);
  DdpgLearner l{c.actor, c.critic, c.actor_target, c.critic_target, Adam(cfg.lr_policy), Adam(cfg.lr_value),
                c.obs_norm};
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  std::mt19937_64 explore(derive_seed(cfg.seed, 1));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.exploration_sigma);

  const long start = c.steps_trained;
  CurveRecorder curve(start, cfg.curve_interval, c.curve);
  env::EnvState state = env::reset(spec, explore());
  double episode_return = 0;
  for (long t = 0; t < cfg.total_steps; ++t) {
    const env::Observation o = env::observe(state);
    Raw raw;
    if (t < cfg.ddpg_start_steps) {
      for (double& a : raw) a = uniform(explore);
    } else {
      const VectorXd mu = l.actor.forward(l.obs_norm.apply(as_vector(o))).array().tanh();
      for (int i = 0; i < env::kActDim; ++i) raw[i] = std::clamp(mu(i) + noise(explore), -1.0, 1.0);
    }
    const env::StepResult r = env::step(state, env::scale_action(spec, raw), spec);
    buffer.push({o, raw, r.reward, env::observe(r.next_state), r.info.goal_reached});
    if (cfg.normalize_obs) l.obs_norm.update(as_vector(o));
    episode_return += r.reward;
    if (r.done) {
      curve.episode(episode_return);
      episode_return = 0;
      state = env::reset(spec, explore());
    } else {
      state = r.next_state;
    }
    if (t >= cfg.ddpg_update_after && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      ddpg_update(l, buffer, cfg, rng);
    }
    const std::size_t before = c.curve.size();
    curve.at(start + t + 1);
    if (progress && c.curve.size() != before) progress(start + t + 1, curve.last());
  }
  c.actor = l.actor;
  c.critic = l.q;
  c.actor_target = l.actor_target;
  c.critic_target = l.q_target;
  c.obs_norm = l.obs_norm;
  c.steps_trained = start + cfg.total_steps;
}

}  // namespace

Checkpoint initial_checkpoint(Algo algo, const env::EnvSpec& spec, const AlgoConfig& cfg) {
  cfg.validate();
  spec.validate();
  std::mt19937_64 rng(cfg.seed);
  Checkpoint c;
  c.algo = algo;
  c.config = cfg;
  c.env = spec;
  c.seed = cfg.seed;
  if (algo == Algo::kDdpg) {
    DdpgLearner l = make_ddpg_learner(cfg, rng);
    c.actor = l.actor;
    c.critic = l.q;
    c.actor_target = l.actor_target;
    c.critic_target = l.q_target;
  } else {
    OnPolicyLearner l = make_on_policy_learner(cfg, rng);
    c.actor = l.policy.mean;
    c.log_std = l.policy.log_std;
    c.critic = l.value;
  }
  return c;
}

std::array<double, env::kActDim> policy_action(const Checkpoint& c, const env::Observation& obs) {
  VectorXd a = c.actor.forward(c.obs_norm.apply(as_vector(obs)));
  if (c.algo == Algo::kDdpg) a = a.array().tanh();
  return clip_unit(a);
}

Checkpoint train(Algo algo, const env::EnvSpec& spec, const AlgoConfig& cfg, const ProgressFn& progress) {
  if (cfg.init_checkpoint.empty()) {
    return train_from(initial_checkpoint(algo, spec, cfg), algo, spec, cfg, progress);
  }
  return train_from(load_checkpoint(cfg.init_checkpoint), algo, spec, cfg, progress);
}

Checkpoint train_from(const Checkpoint& init, Algo algo, const env::EnvSpec& spec, const AlgoConfig& cfg,
                      const ProgressFn& progress) {
  cfg.validate();
  spec.validate();
  check_compatible(init, initial_checkpoint(algo, spec, cfg));
  Checkpoint c = init;
  c.config = cfg;
  c.env = spec;
  c.seed = cfg.seed;
  if (algo == Algo::kDdpg) {
    train_ddpg(c, spec, cfg, progress);
  } else {
    train_on_policy(c, spec, cfg, progress);
  }
  return c;
}

std::uint64_t eval_episode_seed(int i) { return 1000000u + static_cast<std::uint64_t>(i); }

namespace {

EvalResult run_evaluation(const Controller& controller, const env::EnvSpec& spec, int episodes, bool parallel) {
  if (episodes < 1) throw Error(ErrorCode::kConfigError, "episodes must be at least 1");
  spec.validate();
  struct Outcome {
    double distance, travel, ret;
    bool success;
  };
  std::vector<Outcome> out(static_cast<std::size_t>(episodes));
  const auto episode = [&](std::size_t i) {
    env::EnvState s = env::reset(spec, eval_episode_seed(static_cast<int>(i)));
    double ret = 0;
    env::StepResult r;
    r.next_state = s;
    do {
      r = env::step(s, controller(s), spec);
      ret += r.reward;
      s = r.next_state;
    } while (!r.done);
    out[i] = {math::distance(s.box_pos, s.goal_pos), r.info.box_travel, ret, r.info.goal_reached};
  };
  if (parallel) {
    parallel_for(out.size(), episode);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) episode(i);
  }
  EvalResult e;
  e.episodes = episodes;
  for (const Outcome& o : out) {
    e.mean_final_distance += o.distance;
    e.mean_travel += o.travel;
    e.mean_return += o.ret;
    e.success_rate += o.success ? 1.0 : 0.0;
  }
  e.mean_final_distance /= episodes;
  e.mean_travel /= episodes;
  e.mean_return /= episodes;
  e.success_rate /= episodes;
  return e;
}

}  // namespace

EvalResult evaluate_controller(const Controller& controller, const env::EnvSpec& spec, int episodes) {
  return run_evaluation(controller, spec, episodes, true);
}

EvalResult evaluate_controller_serial(const Controller& controller, const env::EnvSpec& spec, int episodes) {
  return run_evaluation(controller, spec, episodes, false);
}

EvalResult evaluate(const Checkpoint& c, const env::EnvSpec& spec, int episodes) {
  return evaluate_controller(
      [&](const env::EnvState& s) { return env::scale_action(spec, policy_action(c, env::observe(s))); }, spec,
      episodes);
}

}  // namespace toolkin::rl
