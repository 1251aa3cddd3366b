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

// Update rules: advantage estimation, actor-critic, clipped-ratio and
// trust-region policy updates, and deterministic actor-critic off-policy
// learning. Loss functions are exposed separately so their gradients can be
// checked against finite differences.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "toolkin/env.hpp"
#include "toolkin/rl/mlp.hpp"
#include "toolkin/rl/policy.hpp"

namespace toolkin::rl {

enum class Algo { kA2c, kTrpo, kPpo, kDdpg };

std::string to_string(Algo a);
Algo parse_algo(std::string_view name);  // throws kConfigError

struct AlgoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double lr_policy = 3e-4;
  double lr_value = 1e-3;
  double ppo_clip = 0.2;
  int ppo_epochs = 10;
  int minibatch = 64;
  double trpo_delta = 0.01;
  int cg_iters = 10;
  int backtrack_steps = 10;
  double backtrack_coeff = 0.8;
  double ddpg_tau = 0.005;
  int buffer_capacity = 100000;
  int batch_size = 128;
  double exploration_sigma = 0.1;
  int rollout_horizon = 2048;
  long total_steps = 150000;
  std::uint64_t seed = 1;

  int num_envs = 8;        // parallel environment workers for on-policy collection
  int a2c_steps = 0;       // steps per worker between A2C updates; 0 uses rollout_horizon
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  int value_epochs = 10;   // value regression passes per TRPO update
  double cg_damping = 0.1;
  double fvp_step = 1e-5;  // finite-difference step for Fisher-vector products
  int ddpg_start_steps = 10000;
  int ddpg_update_after = 1000;
  double init_log_std = -2.0;
  bool normalize_obs = true;  // running standardization of network inputs
  std::vector<int> hidden{64, 64};
  int curve_interval = 2048;
  std::string init_checkpoint;  // empty: train from scratch

  void validate() const;  // throws kConfigError
};

// ---------------------------------------------------------------- advantages

struct Advantages {
  VectorXd advantages;
  VectorXd returns;  // advantages + values
};

/// GAE(gamma, lambda) over one worker's time-ordered rollout. dones[t] marks
/// that the episode ended after step t; `last_value` bootstraps the step that
/// follows the final one.
Advantages compute_advantages(const VectorXd& rewards, const VectorXd& values,
                              const std::vector<bool>& dones, double gamma, double lambda,
                              double last_value = 0.0);

// ---------------------------------------------------------------- on-policy

struct RolloutBatch {
  MatrixXd obs;       // kObsDim x N
  MatrixXd actions;   // kActDim x N
  VectorXd logp_old;
  MatrixXd mean_old;  // policy means at collection time
  VectorXd log_std_old;
  VectorXd advantages;
  VectorXd returns;

  Eigen::Index size() const { return obs.cols(); }
  RolloutBatch subset(const std::vector<Eigen::Index>& idx) const;
};

/// -mean(log pi(a|s) * A) - entropy_coef * H.
double pg_loss(const GaussianPolicy& policy, const RolloutBatch& b, double entropy_coef,
               VectorXd* grad = nullptr);

/// -mean(min(r A, clip(r, 1-eps, 1+eps) A)), r = pi(a|s) / pi_old(a|s).
double ppo_loss(const GaussianPolicy& policy, const RolloutBatch& b, double eps,
                VectorXd* grad = nullptr);

/// mean(r A); the quantity the trust-region step maximizes.
double surrogate(const GaussianPolicy& policy, const RolloutBatch& b, VectorXd* grad = nullptr);

/// Sample mean of KL(pi_theta(.|s) || pi_old(.|s)).
double mean_kl(const GaussianPolicy& policy, const RolloutBatch& b, VectorXd* grad = nullptr);

/// Hessian of mean_kl at the current parameters times v, by central
/// differences of the analytic KL gradient.
VectorXd fisher_vector_product(const GaussianPolicy& policy, const RolloutBatch& b,
                               const VectorXd& v, double h);

/// 0.5 * mean((V(s) - R)^2).
double value_loss(const Mlp& value, const MatrixXd& obs, const VectorXd& returns,
                  VectorXd* grad = nullptr);

struct OnPolicyLearner {
  GaussianPolicy policy;
  Mlp value;
  Adam policy_opt;
  Adam value_opt;
};

OnPolicyLearner make_on_policy_learner(const AlgoConfig& cfg, std::mt19937_64& rng);

struct UpdateStats {
  double policy_loss = 0;
  double value_loss = 0;
  double kl = 0;
  bool accepted = true;  // trust-region line search outcome
  int backtracks = 0;
};

UpdateStats a2c_update(OnPolicyLearner& learner, const RolloutBatch& batch, const AlgoConfig& cfg);
UpdateStats ppo_update(OnPolicyLearner& learner, const RolloutBatch& batch, const AlgoConfig& cfg,
                       std::mt19937_64& rng);
/// Policy step only; parameters are untouched when no candidate passes.
UpdateStats trpo_policy_step(GaussianPolicy& policy, const RolloutBatch& batch, const AlgoConfig& cfg);
UpdateStats trpo_update(OnPolicyLearner& learner, const RolloutBatch& batch, const AlgoConfig& cfg,
                        std::mt19937_64& rng);

/// Solves A x = b for symmetric positive definite A given as a product.
template <class Product>
VectorXd conjugate_gradient(const Product& apply, const VectorXd& b, int iters,
                            double tol = 1e-10) {
  VectorXd x = VectorXd::Zero(b.size());
  VectorXd r = b;
  VectorXd p = r;
  double rr = r.squaredNorm();
  for (int i = 0; i < iters && rr > tol; ++i) {
    const VectorXd ap = apply(p);
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double next = r.squaredNorm();
    p = r + (next / rr) * p;
    rr = next;
  }
  return x;
}

// ---------------------------------------------------------------- off-policy

struct Transition {
  env::Observation obs{};
  std::array<double, env::kActDim> action{};
  double reward = 0;
  env::Observation next_obs{};
  bool done = false;  // true goal termination only; time limits bootstrap
};

struct TransitionBatch {
  MatrixXd obs;
  MatrixXd actions;
  VectorXd rewards;
  MatrixXd next_obs;
  VectorXd dones;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(const Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }
  /// Uniform sample with replacement; throws kBufferTooSmall when size < n.
  TransitionBatch sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

TransitionBatch make_batch(const std::vector<Transition>& ts);

struct DdpgLearner {
  Mlp actor;  // deterministic action = tanh(actor(s))
  Mlp q;      // Q(s, a) over concatenated inputs
  Mlp actor_target;
  Mlp q_target;
  Adam actor_opt;
  Adam q_opt;
  RunningNorm obs_norm{env::kObsDim};  // applied to sampled observations
};

DdpgLearner make_ddpg_learner(const AlgoConfig& cfg, std::mt19937_64& rng);

MatrixXd actor_actions(const Mlp& actor, const MatrixXd& obs);

/// r + gamma (1 - d) Q_targ(s', mu_targ(s')).
VectorXd ddpg_targets(const DdpgLearner& l, const TransitionBatch& b, double gamma);

/// mean((Q(s, a) - y)^2).
double q_loss(const Mlp& q, const MatrixXd& obs, const MatrixXd& actions, const VectorXd& y,
              VectorXd* grad = nullptr);

/// -mean(Q(s, tanh(actor(s)))); gradient with respect to the actor only.
double actor_loss(const Mlp& actor, const Mlp& q, const MatrixXd& obs, VectorXd* grad = nullptr);

/// target <- tau * live + (1 - tau) * target.
void polyak_update(Mlp& target, const Mlp& live, double tau);

UpdateStats ddpg_update(DdpgLearner& l, const ReplayBuffer& buffer, const AlgoConfig& cfg,
                        std::mt19937_64& rng);

}  // namespace toolkin::rl
