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
#include <numeric>

#include "toolkin/error.hpp"
#include "toolkin/rl/algos.hpp"

namespace toolkin::rl {
namespace {

struct PolicyEval {
  MatrixXd means;
  MatrixXd z;  // standardized residuals (a - mean) / sigma
  VectorXd logp;
};

PolicyEval eval_policy(const Mlp& mean_net, const VectorXd& log_std, const RolloutBatch& b) {
  PolicyEval e;
  e.means = mean_net.forward_batch(b.obs);
  e.z = (b.actions - e.means).array().colwise() * (-log_std).array().exp();
  e.logp = gaussian_logprob(e.means, log_std, b.actions);
  return e;
}

// Gradient of sum_s c_s * log pi(a_s|s_s) with respect to the flat policy
// parameters (mean network, then log_std).
VectorXd weighted_logp_grad(const Mlp& mean_net, const VectorXd& log_std, const RolloutBatch& b,
                            const PolicyEval& e, const VectorXd& c) {
  const VectorXd inv_std = (-log_std).array().exp();
  MatrixXd upstream = e.z.array().colwise() * inv_std.array();
  upstream.array().rowwise() *= c.transpose().array();
  VectorXd g(mean_net.num_params() + log_std.size());
  g.head(mean_net.num_params()) = mlp_gradients(mean_net, b.obs, upstream).params;
  g.tail(log_std.size()) = (e.z.array().square() - 1.0).matrix() * c;
  return g;
}

double kl_flat(const Mlp& mean_net, const VectorXd& log_std, const RolloutBatch& b, VectorXd* grad) {
  const MatrixXd means = mean_net.forward_batch(b.obs);
  const VectorXd var_old = (2.0 * b.log_std_old).array().exp();
  const VectorXd var = (2.0 * log_std).array().exp();
  const double n = static_cast<double>(b.size());
  const MatrixXd diff = means - b.mean_old;
  const MatrixXd scaled = diff.array().colwise() / var_old.array();
  double per_state = 0.0;  // part of the divergence shared by every state
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    per_state += b.log_std_old(i) - log_std(i) + 0.5 * var(i) / var_old(i) - 0.5;
  }
  const double kl = per_state + 0.5 * (diff.array() * scaled.array()).sum() / n;
  if (grad) {
    grad->resize(mean_net.num_params() + log_std.size());
    grad->head(mean_net.num_params()) = mlp_gradients(mean_net, b.obs, scaled / n).params;
    grad->tail(log_std.size()) = (var.array() / var_old.array() - 1.0).matrix();
  }
  return kl;
}

void normalize(VectorXd& v) {
  if (v.size() < 2) return;
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
  v = (v.array() - mean) / (sd + 1e-8);
}

std::vector<Eigen::Index> shuffled(Eigen::Index n, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  // Fisher-Yates with an explicit draw so the order is fixed for a given engine.
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> u(0, i - 1);
    std::swap(idx[i - 1], idx[u(rng)]);
  }
  return idx;
}

void policy_step(OnPolicyLearner& l, VectorXd g, double max_norm) {
  clip_grad_norm(g, max_norm);
  VectorXd p = l.policy.flat();
  l.policy_opt.step(p, g);
  l.policy.set_flat(p);
}

void value_step(OnPolicyLearner& l, VectorXd g, double max_norm) {
  clip_grad_norm(g, max_norm);
  l.value_opt.step(l.value.params(), g);
}

double value_epochs(OnPolicyLearner& l, const RolloutBatch& b, const AlgoConfig& cfg, int epochs,
                    std::mt19937_64& rng) {
  double loss = 0;
  for (int e = 0; e < epochs; ++e) {
    const std::vector<Eigen::Index> order = shuffled(b.size(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.minibatch));
      const RolloutBatch mb = b.subset({order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi)});
      VectorXd g;
      loss = value_loss(l.value, mb.obs, mb.returns, &g);
      value_step(l, g, cfg.max_grad_norm);
    }
  }
  return loss;
}

}  // namespace

std::string to_string(Algo a) {
  switch (a) {
    case Algo::kA2c: return "a2c";
    case Algo::kTrpo: return "trpo";
    case Algo::kPpo: return "ppo";
    case Algo::kDdpg: return "ddpg";
  }
  return "?";
}

Algo parse_algo(std::string_view name) {
  if (name == "a2c") return Algo::kA2c;
  if (name == "trpo") return Algo::kTrpo;
  if (name == "ppo") return Algo::kPpo;
  if (name == "ddpg") return Algo::kDdpg;
  throw Error(ErrorCode::kConfigError, "unknown algorithm '" + std::string(name) + "'");
}

void AlgoConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfigError, what);
  };
  require(gamma > 0 && gamma <= 1, "gamma must lie in (0, 1]");
  require(gae_lambda >= 0 && gae_lambda <= 1, "gae_lambda must lie in [0, 1]");
  require(lr_policy > 0 && lr_value > 0, "learning rates must be positive");
  require(ppo_clip > 0, "ppo_clip must be positive");
  require(trpo_delta > 0, "trpo_delta must be positive");
  require(backtrack_coeff > 0 && backtrack_coeff < 1, "backtrack_coeff must lie in (0, 1)");
  require(ddpg_tau >= 0 && ddpg_tau <= 1, "ddpg_tau must lie in [0, 1]");
  require(ppo_epochs >= 1 && minibatch >= 1 && cg_iters >= 1 && backtrack_steps >= 1 &&
              buffer_capacity >= 1 && batch_size >= 1 && rollout_horizon >= 1 && num_envs >= 1 &&
              a2c_steps >= 0 && value_epochs >= 1 && curve_interval >= 1,
          "counts must be at least 1");
  require(total_steps >= 0, "total_steps must be non-negative");
  require(exploration_sigma >= 0 && entropy_coef >= 0 && max_grad_norm > 0 && cg_damping >= 0 &&
              fvp_step > 0,
          "invalid regularization setting");
  require(ddpg_start_steps >= 0 && ddpg_update_after >= 0, "ddpg warm-up counts must be non-negative");
  require(!hidden.empty() && std::all_of(hidden.begin(), hidden.end(), [](int h) { return h > 0; }),
          "hidden layer sizes must be positive");
  require(init_log_std >= GaussianPolicy::kLogStdMin && init_log_std <= GaussianPolicy::kLogStdMax,
          "init_log_std outside the allowed range");
}

Advantages compute_advantages(const VectorXd& rewards, const VectorXd& values,
                              const std::vector<bool>& dones, double gamma, double lambda,
                              double last_value) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || static_cast<Eigen::Index>(dones.size()) != n) {
    throw Error(ErrorCode::kLengthMismatch, "rewards, values and dones must have equal length");
  }
  Advantages out{VectorXd(n), VectorXd(n)};
  double next_value = last_value;
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double keep = dones[static_cast<std::size_t>(t)] ? 0.0 : 1.0;
    const double delta = rewards(t) + gamma * next_value * keep - values(t);
    running = delta + gamma * lambda * keep * running;
    out.advantages(t) = running;
    next_value = values(t);
  }
  out.returns = out.advantages + values;
  return out;
}

RolloutBatch RolloutBatch::subset(const std::vector<Eigen::Index>& idx) const {
  RolloutBatch s;
  const auto n = static_cast<Eigen::Index>(idx.size());
  s.obs.resize(obs.rows(), n);
  s.actions.resize(actions.rows(), n);
  s.mean_old.resize(mean_old.rows(), n);
  s.logp_old.resize(n);
  s.advantages.resize(n);
  s.returns.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = idx[static_cast<std::size_t>(k)];
    s.obs.col(k) = obs.col(i);
    s.actions.col(k) = actions.col(i);
    if (mean_old.size()) s.mean_old.col(k) = mean_old.col(i);
    s.logp_old(k) = logp_old(i);
    s.advantages(k) = advantages(i);
    s.returns(k) = returns(i);
  }
  s.log_std_old = log_std_old;
  return s;
}

double pg_loss(const GaussianPolicy& policy, const RolloutBatch& b, double entropy_coef, VectorXd* grad) {
  const PolicyEval e = eval_policy(policy.mean, policy.log_std, b);
  const double n = static_cast<double>(b.size());
  const double loss = -(e.logp.array() * b.advantages.array()).sum() / n -
                      entropy_coef * gaussian_entropy(policy.log_std);
  if (grad) {
    *grad = weighted_logp_grad(policy.mean, policy.log_std, b, e, -b.advantages / n);
    grad->tail(policy.log_std.size()).array() -= entropy_coef;
  }
  return loss;
}

double ppo_loss(const GaussianPolicy& policy, const RolloutBatch& b, double eps, VectorXd* grad) {
  const PolicyEval e = eval_policy(policy.mean, policy.log_std, b);
  const double n = static_cast<double>(b.size());
  double total = 0.0;
  VectorXd c = VectorXd::Zero(b.size());
  for (Eigen::Index s = 0; s < b.size(); ++s) {
    const double r = std::exp(e.logp(s) - b.logp_old(s));
    const double a = b.advantages(s);
    const double unclipped = r * a;
    const double clipped = std::clamp(r, 1.0 - eps, 1.0 + eps) * a;
    total += std::min(unclipped, clipped);
    if (unclipped <= clipped) c(s) = -unclipped / n;  // d r / d theta = r * d logp
  }
  if (grad) *grad = weighted_logp_grad(policy.mean, policy.log_std, b, e, c);
  return -total / n;
}

double surrogate(const GaussianPolicy& policy, const RolloutBatch& b, VectorXd* grad) {
  const PolicyEval e = eval_policy(policy.mean, policy.log_std, b);
  const double n = static_cast<double>(b.size());
  const VectorXd ra = ((e.logp - b.logp_old).array().exp() * b.advantages.array()).matrix();
  if (grad) *grad = weighted_logp_grad(policy.mean, policy.log_std, b, e, ra / n);
  return ra.sum() / n;
}

double mean_kl(const GaussianPolicy& policy, const RolloutBatch& b, VectorXd* grad) {
  return kl_flat(policy.mean, policy.log_std, b, grad);
}

VectorXd fisher_vector_product(const GaussianPolicy& policy, const RolloutBatch& b, const VectorXd& v,
                               double h) {
  const VectorXd base = policy.flat();
  const Eigen::Index nm = policy.mean.num_params();
  Mlp net = policy.mean;
  VectorXd gp, gm;
  const VectorXd plus = base + h * v;
  const VectorXd minus = base - h * v;
  net.params() = plus.head(nm);
  kl_flat(net, plus.tail(policy.log_std.size()), b, &gp);
  net.params() = minus.head(nm);
  kl_flat(net, minus.tail(policy.log_std.size()), b, &gm);
  return (gp - gm) / (2.0 * h);
}

double value_loss(const Mlp& value, const MatrixXd& obs, const VectorXd& returns, VectorXd* grad) {
  if (returns.size() != obs.cols()) {
    throw Error(ErrorCode::kLengthMismatch, "one return per observation");
  }
  const VectorXd err = value.forward_batch(obs).row(0).transpose() - returns;
  const double n = static_cast<double>(returns.size());
  if (grad) *grad = mlp_gradients(value, obs, (err / n).transpose()).params;
  return 0.5 * err.squaredNorm() / n;
}

OnPolicyLearner make_on_policy_learner(const AlgoConfig& cfg, std::mt19937_64& rng) {
  std::vector<int> pi{env::kObsDim};
  pi.insert(pi.end(), cfg.hidden.begin(), cfg.hidden.end());
  std::vector<int> vf = pi;
  pi.push_back(env::kActDim);
  vf.push_back(1);
  OnPolicyLearner l;
  l.policy = GaussianPolicy(Mlp::random(pi, rng, 0.01), cfg.init_log_std);
  l.value = Mlp::random(vf, rng, 1.0);
  l.policy_opt = Adam(cfg.lr_policy);
  l.value_opt = Adam(cfg.lr_value);
  return l;
}

UpdateStats a2c_update(OnPolicyLearner& l, const RolloutBatch& batch, const AlgoConfig& cfg) {
  UpdateStats st;
  VectorXd gp, gv;
  st.policy_loss = pg_loss(l.policy, batch, cfg.entropy_coef, &gp);
  st.value_loss = value_loss(l.value, batch.obs, batch.returns, &gv);
  policy_step(l, gp, cfg.max_grad_norm);
  value_step(l, gv, cfg.max_grad_norm);
  return st;
}

UpdateStats ppo_update(OnPolicyLearner& l, const RolloutBatch& batch, const AlgoConfig& cfg,
                       std::mt19937_64& rng) {
  UpdateStats st;
  for (int e = 0; e < cfg.ppo_epochs; ++e) {
    const std::vector<Eigen::Index> order = shuffled(batch.size(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.minibatch));
      RolloutBatch mb = batch.subset({order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi)});
      normalize(mb.advantages);
      VectorXd gp, gv;
      st.policy_loss = ppo_loss(l.policy, mb, cfg.ppo_clip, &gp);
      st.value_loss = value_loss(l.value, mb.obs, mb.returns, &gv);
      policy_step(l, gp, cfg.max_grad_norm);
      value_step(l, gv, cfg.max_grad_norm);
    }
  }
  st.kl = mean_kl(l.policy, batch);
  return st;
}

UpdateStats trpo_policy_step(GaussianPolicy& policy, const RolloutBatch& batch, const AlgoConfig& cfg) {
  UpdateStats st;
  st.accepted = false;
  VectorXd g;
  const double base = surrogate(policy, batch, &g);
  const auto fvp = [&](const VectorXd& v) {
    return VectorXd(fisher_vector_product(policy, batch, v, cfg.fvp_step) + cfg.cg_damping * v);
  };
  const VectorXd x = conjugate_gradient(fvp, g, cfg.cg_iters);
  const double shs = x.dot(fvp(x));
  if (!(shs > 0) || !std::isfinite(shs)) return st;
  const VectorXd full = std::sqrt(2.0 * cfg.trpo_delta / shs) * x;
  const VectorXd theta = policy.flat();
  GaussianPolicy candidate = policy;
  double frac = 1.0;
  for (int j = 0; j < cfg.backtrack_steps; ++j, frac *= cfg.backtrack_coeff) {
    candidate.set_flat(theta + frac * full);
    const double kl = mean_kl(candidate, batch);
    const double value = surrogate(candidate, batch);
    if (std::isfinite(value) && value > base && kl <= cfg.trpo_delta) {
      policy = candidate;
      st.accepted = true;
      st.backtracks = j;
      st.kl = kl;
      st.policy_loss = -value;
      return st;
    }
  }
  st.backtracks = cfg.backtrack_steps;
  st.policy_loss = -base;
  return st;
}

UpdateStats trpo_update(OnPolicyLearner& l, const RolloutBatch& batch, const AlgoConfig& cfg,
                        std::mt19937_64& rng) {
  RolloutBatch b = batch;
  normalize(b.advantages);
  UpdateStats st = trpo_policy_step(l.policy, b, cfg);
  st.value_loss = value_epochs(l, b, cfg, cfg.value_epochs, rng);
  return st;
}

}  // namespace toolkin::rl
