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
#include <cmath>

#include "toolkin/error.hpp"
#include "toolkin/rl/algos.hpp"

namespace toolkin::rl {
namespace {

MatrixXd stack(const MatrixXd& obs, const MatrixXd& actions) {
  MatrixXd x(obs.rows() + actions.rows(), obs.cols());
  x << obs, actions;
  return x;
}

void put(MatrixXd& m, Eigen::Index col, const double* src) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, col) = src[r];
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::kConfigError, "replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

TransitionBatch make_batch(const std::vector<Transition>& ts) {
  const auto n = static_cast<Eigen::Index>(ts.size());
  TransitionBatch b{MatrixXd(env::kObsDim, n), MatrixXd(env::kActDim, n), VectorXd(n),
                    MatrixXd(env::kObsDim, n), VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = ts[static_cast<std::size_t>(i)];
    put(b.obs, i, t.obs.data());
    put(b.actions, i, t.action.data());
    put(b.next_obs, i, t.next_obs.data());
    b.rewards(i) = t.reward;
    b.dones(i) = t.done ? 1.0 : 0.0;
  }
  return b;
}

TransitionBatch ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (data_.size() < n || n == 0) {
    throw Error(ErrorCode::kBufferTooSmall, "replay buffer holds " + std::to_string(data_.size()) +
                                                " transitions, batch needs " + std::to_string(n));
  }
  std::uniform_int_distribution<std::size_t> u(0, data_.size() - 1);
  std::vector<Transition> picked;
  picked.reserve(n);
  for (std::size_t i = 0; i < n; ++i) picked.push_back(data_[u(rng)]);
  return make_batch(picked);
}

DdpgLearner make_ddpg_learner(const AlgoConfig& cfg, std::mt19937_64& rng) {
  std::vector<int> pi{env::kObsDim};
  pi.insert(pi.end(), cfg.hidden.begin(), cfg.hidden.end());
  std::vector<int> qs{env::kObsDim + env::kActDim};
  qs.insert(qs.end(), cfg.hidden.begin(), cfg.hidden.end());
  pi.push_back(env::kActDim);
  qs.push_back(1);
  DdpgLearner l;
  l.actor = Mlp::random(pi, rng, 0.01);
  l.q = Mlp::random(qs, rng, 1.0);
  l.actor_target = l.actor;
  l.q_target = l.q;
  l.actor_opt = Adam(cfg.lr_policy);
  l.q_opt = Adam(cfg.lr_value);
  return l;
}

MatrixXd actor_actions(const Mlp& actor, const MatrixXd& obs) {
  return actor.forward_batch(obs).array().tanh();
}

VectorXd ddpg_targets(const DdpgLearner& l, const TransitionBatch& b, double gamma) {
  const MatrixXd next_a = actor_actions(l.actor_target, b.next_obs);
  const VectorXd q_next = l.q_target.forward_batch(stack(b.next_obs, next_a)).row(0).transpose();
  return b.rewards.array() + gamma * (1.0 - b.dones.array()) * q_next.array();
}

double q_loss(const Mlp& q, const MatrixXd& obs, const MatrixXd& actions, const VectorXd& y,
              VectorXd* grad) {
  if (y.size() != obs.cols() || actions.cols() != obs.cols()) {
    throw Error(ErrorCode::kLengthMismatch, "one target per transition");
  }
  const MatrixXd x = stack(obs, actions);
  const VectorXd err = q.forward_batch(x).row(0).transpose() - y;
  const double n = static_cast<double>(y.size());
  if (grad) *grad = mlp_gradients(q, x, (2.0 * err / n).transpose()).params;
  return err.squaredNorm() / n;
}

double actor_loss(const Mlp& actor, const Mlp& q, const MatrixXd& obs, VectorXd* grad) {
  const MatrixXd a = actor_actions(actor, obs);
  const MatrixXd x = stack(obs, a);
  const double n = static_cast<double>(obs.cols());
  const double loss = -q.forward_batch(x).sum() / n;
  if (grad) {
    const MatrixXd upstream = MatrixXd::Constant(1, obs.cols(), -1.0 / n);
    const MatrixXd da = mlp_gradients(q, x, upstream).input.bottomRows(a.rows());
    const MatrixXd du = da.array() * (1.0 - a.array().square());
    *grad = mlp_gradients(actor, obs, du).params;
  }
  return loss;
}

void polyak_update(Mlp& target, const Mlp& live, double tau) {
  if (target.num_params() != live.num_params()) {
    throw Error(ErrorCode::kDimensionMismatch, "target and live networks differ in shape");
  }
  if (tau == 1.0) {
    target.params() = live.params();
  } else if (tau != 0.0) {
    target.params() = tau * live.params() + (1.0 - tau) * target.params();
  }
}

UpdateStats ddpg_update(DdpgLearner& l, const ReplayBuffer& buffer, const AlgoConfig& cfg,
                        std::mt19937_64& rng) {
  TransitionBatch b = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
  b.obs = l.obs_norm.apply(b.obs);
  b.next_obs = l.obs_norm.apply(b.next_obs);
  UpdateStats st;
  const VectorXd y = ddpg_targets(l, b, cfg.gamma);
  VectorXd gq, ga;
  st.value_loss = q_loss(l.q, b.obs, b.actions, y, &gq);
  l.q_opt.step(l.q.params(), gq);
  st.policy_loss = actor_loss(l.actor, l.q, b.obs, &ga);
  l.actor_opt.step(l.actor.params(), ga);
  polyak_update(l.q_target, l.q, cfg.ddpg_tau);
  polyak_update(l.actor_target, l.actor, cfg.ddpg_tau);
  return st;
}

}  // namespace toolkin::rl
