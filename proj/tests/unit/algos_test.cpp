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

#include "toolkin/rl/algos.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fd_check.hpp"
#include "toolkin/error.hpp"

namespace toolkin::rl {
namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  }
  return m;
}

GaussianPolicy small_policy(std::mt19937_64& rng, int obs = 4, int act = 3) {
  GaussianPolicy p(Mlp::random({obs, 6, act}, rng, 1.0), -0.3);
  std::uniform_real_distribution<double> u(-0.8, 0.2);
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i) p.log_std(i) = u(rng);
  return p;
}

// On-policy batch collected from `behaviour` (its means and log-probs are
// the "old" quantities).
RolloutBatch make_batch(const GaussianPolicy& behaviour, Eigen::Index n, std::mt19937_64& rng) {
  RolloutBatch b;
  b.obs = random_matrix(behaviour.mean.input_dim(), n, rng);
  b.mean_old = behaviour.mean.forward_batch(b.obs);
  b.log_std_old = behaviour.log_std;
  const VectorXd sd = behaviour.log_std.array().exp();
  b.actions = b.mean_old + (random_matrix(b.mean_old.rows(), n, rng).array().colwise() * sd.array()).matrix();
  b.logp_old = gaussian_logprob(b.mean_old, behaviour.log_std, b.actions);
  b.advantages = random_matrix(n, 1, rng).col(0);
  b.returns = random_matrix(n, 1, rng).col(0);
  return b;
}

// Copy of the policy with flat parameters replaced, without clamping.
GaussianPolicy with_flat(const GaussianPolicy& p, const VectorXd& flat) {
  GaussianPolicy q = p;
  q.mean.params() = flat.head(p.mean.num_params());
  q.log_std = flat.tail(p.log_std.size());
  return q;
}

// ------------------------------------------------------------------ policy

TEST(GaussianPolicy, ClampFloorGivesNearDeterministicAction) {
  std::mt19937_64 rng(1);
  GaussianPolicy p(Mlp::random({30, 8, 7}, rng, 1.0), -20.0);
  EXPECT_EQ(p.log_std, VectorXd::Constant(7, GaussianPolicy::kLogStdMin));
  const VectorXd obs = random_matrix(30, 1, rng).col(0);
  const PolicySample s = sample_action(p, obs, rng);
  EXPECT_LT((s.action - s.mean).cwiseAbs().maxCoeff(), 0.05);
  const double sigma = std::exp(-5.0);
  const double mode = 7 * -std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  EXPECT_LE(s.logprob, mode);
  EXPECT_NEAR(s.logprob, mode, 0.5 * (s.action - s.mean).squaredNorm() / (sigma * sigma) + 1e-9);
}

TEST(GaussianPolicy, MeanIsTheMode) {
  std::mt19937_64 rng(2);
  const VectorXd log_std = (VectorXd(3) << -0.5, 0.1, -1.0).finished();
  const VectorXd mean = (VectorXd(3) << 0.2, -0.3, 1.0).finished();
  const double at_mode = gaussian_logprob(mean, log_std, mean)(0);
  for (int i = 0; i < 100; ++i) {
    const VectorXd a = mean + random_matrix(3, 1, rng).col(0);
    EXPECT_LT(gaussian_logprob(mean, log_std, a)(0), at_mode);
  }
}

TEST(GaussianPolicy, LogprobMatchesClosedForm) {
  const VectorXd log_std = (VectorXd(2) << std::log(0.5), std::log(2.0)).finished();
  const VectorXd mean = (VectorXd(2) << 1.0, -1.0).finished();
  const VectorXd a = (VectorXd(2) << 1.5, 1.0).finished();
  // N(1.5; 1, 0.5) * N(1; -1, 2)
  const double expected = -std::log(0.5 * std::sqrt(2 * std::numbers::pi)) - 0.5 -
                          std::log(2.0 * std::sqrt(2 * std::numbers::pi)) - 0.5;
  EXPECT_NEAR(gaussian_logprob(mean, log_std, a)(0), expected, 1e-14);
}

TEST(GaussianPolicy, MonteCarloMean) {
  std::mt19937_64 rng(3);
  GaussianPolicy p(Mlp::random({30, 8, 7}, rng, 1.0), 0.0);
  const VectorXd obs = random_matrix(30, 1, rng).col(0);
  const VectorXd mean = p.mean.forward(obs);
  const int n = 100000;
  VectorXd sum = VectorXd::Zero(7);
  for (int i = 0; i < n; ++i) sum += sample_action(p, obs, rng).action;
  const double bound = 3.0 * 1.0 / std::sqrt(static_cast<double>(n));
  EXPECT_LT((sum / n - mean).cwiseAbs().maxCoeff(), bound);
}

TEST(GaussianPolicy, FlatRoundTripClampsLogStd) {
  std::mt19937_64 rng(4);
  GaussianPolicy p = small_policy(rng);
  VectorXd f = p.flat();
  EXPECT_EQ(f.size(), p.num_params());
  f(f.size() - 1) = 9.0;
  p.set_flat(f);
  EXPECT_EQ(p.log_std(p.log_std.size() - 1), GaussianPolicy::kLogStdMax);
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  Adam opt(0.1);
  VectorXd p = VectorXd::Zero(3);
  opt.step(p, (VectorXd(3) << 2.0, -0.5, 0.0).finished());
  EXPECT_NEAR(p(0), -0.1, 1e-8);
  EXPECT_NEAR(p(1), 0.1, 1e-8);
  EXPECT_EQ(p(2), 0.0);
}

TEST(Adam, MinimizesQuadratic) {
  Adam opt(0.05);
  VectorXd p = (VectorXd(2) << 3.0, -2.0).finished();
  for (int i = 0; i < 2000; ++i) opt.step(p, 2.0 * (p - VectorXd::Ones(2)));
  EXPECT_LT((p - VectorXd::Ones(2)).norm(), 1e-3);
}

TEST(ClipGradNorm, Rescales) {
  VectorXd g = (VectorXd(2) << 3.0, 4.0).finished();
  EXPECT_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g.norm(), 1.0, 1e-15);
  VectorXd small = (VectorXd(2) << 0.1, 0.0).finished();
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small(0), 0.1);
}

TEST(RunningNorm, MatchesBatchStatistics) {
  std::mt19937_64 rng(5);
  const MatrixXd all = random_matrix(3, 300, rng, 2.0).array() + 5.0;
  RunningNorm n(3);
  n.count = 0;
  n.update(all.leftCols(100));
  n.update(all.middleCols(100, 150));
  n.update(all.rightCols(50));
  const VectorXd mean = all.rowwise().mean();
  const VectorXd var = (all.colwise() - mean).rowwise().squaredNorm() / 300.0;
  EXPECT_LT((n.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((n.var - var).cwiseAbs().maxCoeff(), 1e-12);
  const MatrixXd z = n.apply(all);
  EXPECT_LT(z.rowwise().mean().cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(z.cwiseAbs().maxCoeff(), n.clip);
}

// ---------------------------------------------------------------- advantages

TEST(Gae, SingleTerminalStep) {
  const Advantages a = compute_advantages(VectorXd::Constant(1, 2.0), VectorXd::Constant(1, 0.5), {true}, 1.0, 0.95);
  EXPECT_EQ(a.advantages(0), 1.5);
  EXPECT_EQ(a.returns(0), 2.0);
}

TEST(Gae, LambdaZeroIsOneStepTd) {
  std::mt19937_64 rng(6);
  const VectorXd r = random_matrix(12, 1, rng).col(0);
  const VectorXd v = random_matrix(12, 1, rng).col(0);
  std::vector<bool> d(12, false);
  d[4] = d[9] = true;
  const double last = 0.7, g = 0.9;
  const Advantages a = compute_advantages(r, v, d, g, 0.0, last);
  for (int t = 0; t < 12; ++t) {
    const double next = t + 1 < 12 ? v(t + 1) : last;
    EXPECT_NEAR(a.advantages(t), r(t) + g * next * (d[t] ? 0.0 : 1.0) - v(t), 1e-15);
  }
}

// Direct expansion: A_t = sum_l (gamma lambda)^l delta_{t+l}, stopping after
// the first terminal.
TEST(Gae, MatchesDirectSum) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution end(0.1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 40;
    const VectorXd r = random_matrix(n, 1, rng).col(0);
    const VectorXd v = random_matrix(n, 1, rng).col(0);
    std::vector<bool> d(n);
    for (int t = 0; t < n; ++t) d[t] = end(rng);
    const double last = 1.3, g = 0.99, lam = 0.95;
    const Advantages a = compute_advantages(r, v, d, g, lam, last);
    for (int t = 0; t < n; ++t) {
      double sum = 0, w = 1;
      for (int k = t; k < n; ++k) {
        const double next = k + 1 < n ? v(k + 1) : last;
        sum += w * (r(k) + g * next * (d[k] ? 0.0 : 1.0) - v(k));
        if (d[k]) break;
        w *= g * lam;
      }
      EXPECT_NEAR(a.advantages(t), sum, 1e-10);
      EXPECT_NEAR(a.returns(t), sum + v(t), 1e-10);
    }
  }
}

TEST(Gae, LambdaOneIsMonteCarlo) {
  const VectorXd r = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
  const VectorXd v = (VectorXd(3) << 0.5, 0.25, 0.125).finished();
  const Advantages a = compute_advantages(r, v, {false, false, true}, 0.5, 1.0);
  EXPECT_NEAR(a.returns(0), 1.0 + 0.5 * 2.0 + 0.25 * 3.0, 1e-15);
  EXPECT_NEAR(a.returns(1), 2.0 + 0.5 * 3.0, 1e-15);
}

TEST(Gae, LengthMismatch) {
  try {
    compute_advantages(VectorXd::Zero(3), VectorXd::Zero(2), {false, false, false}, 0.9, 0.9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
  EXPECT_THROW(compute_advantages(VectorXd::Zero(2), VectorXd::Zero(2), {false}, 0.9, 0.9), Error);
}

// ---------------------------------------------------------------- gradients

TEST(Gradients, PolicyGradientLoss) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const GaussianPolicy p = small_policy(rng);
    const RolloutBatch b = make_batch(p, 16, rng);
    VectorXd g;
    pg_loss(p, b, 0.01, &g);
    const auto f = [&](const VectorXd& x) { return pg_loss(with_flat(p, x), b, 0.01); };
    EXPECT_LT(testing::max_fd_rel_error(f, p.flat(), g), 1e-4);
  }
}

TEST(Gradients, PpoLossAwayFromClipKinks) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const GaussianPolicy old = small_policy(rng);
    const RolloutBatch b = make_batch(old, 16, rng);
    GaussianPolicy p = old;
    p.set_flat(old.flat() + 0.05 * random_matrix(old.num_params(), 1, rng).col(0));
    VectorXd g;
    ppo_loss(p, b, 0.2, &g);
    const auto f = [&](const VectorXd& x) { return ppo_loss(with_flat(p, x), b, 0.2); };
    EXPECT_LT(testing::max_fd_rel_error(f, p.flat(), g), 1e-4);
  }
}

TEST(Gradients, SurrogateAndKl) {
  std::mt19937_64 rng(10);
  const GaussianPolicy old = small_policy(rng);
  const RolloutBatch b = make_batch(old, 20, rng);
  GaussianPolicy p = old;
  p.set_flat(old.flat() + 0.1 * random_matrix(old.num_params(), 1, rng).col(0));
  VectorXd gs, gk;
  surrogate(p, b, &gs);
  mean_kl(p, b, &gk);
  EXPECT_LT(testing::max_fd_rel_error([&](const VectorXd& x) { return surrogate(with_flat(p, x), b); }, p.flat(), gs), 1e-4);
  EXPECT_LT(testing::max_fd_rel_error([&](const VectorXd& x) { return mean_kl(with_flat(p, x), b); }, p.flat(), gk), 1e-4);
}

TEST(Gradients, ValueLoss) {
  std::mt19937_64 rng(11);
  const Mlp v = Mlp::random({4, 6, 1}, rng, 1.0);
  const MatrixXd obs = random_matrix(4, 12, rng);
  const VectorXd ret = random_matrix(12, 1, rng).col(0);
  VectorXd g;
  value_loss(v, obs, ret, &g);
  Mlp probe = v;
  const auto f = [&](const VectorXd& x) {
    probe.params() = x;
    return value_loss(probe, obs, ret);
  };
  EXPECT_LT(testing::max_fd_rel_error(f, v.params(), g), 1e-4);
}

TEST(Gradients, QLossAndActorThroughQ) {
  std::mt19937_64 rng(12);
  const Mlp actor = Mlp::random({4, 6, 3}, rng, 1.0);
  const Mlp q = Mlp::random({7, 6, 1}, rng, 1.0);
  const MatrixXd obs = random_matrix(4, 10, rng);
  const MatrixXd act = random_matrix(3, 10, rng);
  const VectorXd y = random_matrix(10, 1, rng).col(0);
  VectorXd gq, ga;
  q_loss(q, obs, act, y, &gq);
  actor_loss(actor, q, obs, &ga);
  Mlp pq = q, pa = actor;
  EXPECT_LT(testing::max_fd_rel_error([&](const VectorXd& x) { pq.params() = x; return q_loss(pq, obs, act, y); }, q.params(), gq), 1e-4);
  EXPECT_LT(testing::max_fd_rel_error([&](const VectorXd& x) { pa.params() = x; return actor_loss(pa, q, obs); }, actor.params(), ga), 1e-4);
}

// ------------------------------------------------------------------ a2c / ppo

TEST(A2c, ZeroAdvantagesLeavePolicyUnchanged) {
  std::mt19937_64 rng(13);
  AlgoConfig cfg;
  cfg.hidden = {8};
  OnPolicyLearner l = make_on_policy_learner(cfg, rng);
  RolloutBatch b = make_batch(l.policy, 10, rng);
  b.advantages.setZero();
  const GaussianPolicy before = l.policy;
  a2c_update(l, b, cfg);
  EXPECT_EQ(l.policy, before);
}

TEST(A2c, PositiveAdvantageRaisesLogprob) {
  std::mt19937_64 rng(14);
  AlgoConfig cfg;
  cfg.hidden = {8};
  OnPolicyLearner l = make_on_policy_learner(cfg, rng);
  RolloutBatch b;
  b.obs = random_matrix(30, 1, rng);
  b.mean_old = l.policy.mean.forward_batch(b.obs);
  b.log_std_old = l.policy.log_std;
  b.actions = b.mean_old.array() + 0.3;
  b.logp_old = gaussian_logprob(b.mean_old, b.log_std_old, b.actions);
  b.advantages = VectorXd::Constant(1, 1.0);
  b.returns = VectorXd::Zero(1);
  const double before = b.logp_old(0);
  a2c_update(l, b, cfg);
  const double after = gaussian_logprob(l.policy.mean.forward_batch(b.obs), l.policy.log_std, b.actions)(0);
  EXPECT_GT(after, before);
}

TEST(Ppo, AtOldPolicyObjectiveIsMeanAdvantage) {
  std::mt19937_64 rng(15);
  const GaussianPolicy p = small_policy(rng);
  const RolloutBatch b = make_batch(p, 32, rng);
  VectorXd g_ppo, g_pg;
  EXPECT_NEAR(-ppo_loss(p, b, 0.2, &g_ppo), b.advantages.mean(), 1e-12);
  pg_loss(p, b, 0.0, &g_pg);
  EXPECT_LT((g_ppo - g_pg).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, g_pg.cwiseAbs().maxCoeff()));
}

TEST(Ppo, ClippedBranchHasZeroGradient) {
  std::mt19937_64 rng(16);
  const GaussianPolicy p = small_policy(rng);
  RolloutBatch b = make_batch(p, 1, rng);
  const double logp = gaussian_logprob(p.mean.forward_batch(b.obs), p.log_std, b.actions)(0);
  b.logp_old(0) = logp - std::log(1.5);  // ratio 1.5
  b.advantages(0) = 2.0;
  VectorXd g;
  EXPECT_NEAR(ppo_loss(p, b, 0.2, &g), -1.2 * 2.0, 1e-12);
  EXPECT_TRUE(g.isZero(0.0));
  b.advantages(0) = -2.0;  // pessimistic branch now follows the ratio
  EXPECT_NEAR(ppo_loss(p, b, 0.2, &g), 1.5 * 2.0, 1e-12);
  EXPECT_FALSE(g.isZero(0.0));
}

TEST(Ppo, ObjectiveMatchesDirectEvaluation) {
  std::mt19937_64 rng(17);
  const GaussianPolicy old = small_policy(rng);
  const RolloutBatch b = make_batch(old, 50, rng);
  GaussianPolicy p = old;
  p.set_flat(old.flat() + 0.3 * random_matrix(old.num_params(), 1, rng).col(0));
  const MatrixXd means = p.mean.forward_batch(b.obs);
  double sum = 0;
  for (Eigen::Index s = 0; s < b.size(); ++s) {
    double logp = 0;
    for (Eigen::Index i = 0; i < means.rows(); ++i) {
      const double sd = std::exp(p.log_std(i));
      const double z = (b.actions(i, s) - means(i, s)) / sd;
      logp += -0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * std::numbers::pi);
    }
    const double r = std::exp(logp - b.logp_old(s));
    const double a = b.advantages(s);
    sum += std::min(r * a, std::min(std::max(r, 0.8), 1.2) * a);
  }
  EXPECT_NEAR(-ppo_loss(p, b, 0.2), sum / b.size(), 1e-10);
}

TEST(Ppo, UpdateImprovesObjective) {
  std::mt19937_64 rng(18);
  AlgoConfig cfg;
  cfg.hidden = {16};
  cfg.ppo_epochs = 4;
  OnPolicyLearner l = make_on_policy_learner(cfg, rng);
  RolloutBatch b = make_batch(l.policy, 256, rng);
  b.obs = random_matrix(30, 256, rng);
  b.mean_old = l.policy.mean.forward_batch(b.obs);
  b.actions = b.mean_old + random_matrix(7, 256, rng) * std::exp(cfg.init_log_std);
  b.logp_old = gaussian_logprob(b.mean_old, b.log_std_old, b.actions);
  const double v_before = value_loss(l.value, b.obs, b.returns);
  ppo_update(l, b, cfg, rng);
  EXPECT_GT(surrogate(l.policy, b), b.advantages.mean());
  EXPECT_LT(value_loss(l.value, b.obs, b.returns), v_before);
}

// ---------------------------------------------------------------------- trpo

TEST(Trpo, DefinitionalValuesAtOldPolicy) {
  std::mt19937_64 rng(19);
  const GaussianPolicy p = small_policy(rng);
  RolloutBatch b = make_batch(p, 64, rng);
  EXPECT_NEAR(mean_kl(p, b), 0.0, 1e-15);
  b.advantages.array() -= b.advantages.mean();
  EXPECT_NEAR(surrogate(p, b), 0.0, 1e-14);
}

TEST(Trpo, KlMatchesClosedForm) {
  RolloutBatch b;
  b.obs = MatrixXd::Zero(1, 1);
  b.mean_old = MatrixXd::Constant(1, 1, 0.0);
  b.log_std_old = VectorXd::Constant(1, std::log(2.0));
  GaussianPolicy p(Mlp({1, 1}), std::log(1.0));
  p.mean.bias(0)(0) = 1.0;
  // KL(N(1,1) || N(0,4)) = log 2 + (1 + 1) / 8 - 1/2
  EXPECT_NEAR(mean_kl(p, b), std::log(2.0) + 2.0 / 8.0 - 0.5, 1e-15);
}

// Toy policy: mean = w x + b, one log std s; Hessian of the mean KL in
// (w, b, s) is known in closed form.
TEST(Trpo, FisherVectorProductMatchesExactHessian) {
  std::mt19937_64 rng(20);
  RolloutBatch b;
  b.obs = random_matrix(1, 30, rng);
  GaussianPolicy p(Mlp({1, 1}), 0.0);
  p.mean.weight(0)(0, 0) = 0.7;
  p.mean.bias(0)(0) = -0.2;
  p.log_std(0) = -0.4;
  b.mean_old = p.mean.forward_batch(b.obs).array() + 0.1;
  b.log_std_old = VectorXd::Constant(1, -0.1);
  const double var_old = std::exp(-0.2);
  const double mx = b.obs.mean(), mxx = b.obs.squaredNorm() / 30.0;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) = mxx / var_old;
  h(0, 1) = h(1, 0) = mx / var_old;
  h(1, 1) = 1.0 / var_old;
  h(2, 2) = 2.0 * std::exp(2.0 * p.log_std(0)) / var_old;
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd v = random_matrix(3, 1, rng).col(0);
    const VectorXd fv = fisher_vector_product(p, b, v, 1e-5);
    EXPECT_LT((fv - h * v).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT((fv - h * v).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Trpo, ConjugateGradientSolvesSpdSystem) {
  Eigen::Matrix3d a;
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Eigen::Vector3d b(1, 2, 3);
  const VectorXd x = conjugate_gradient([&](const VectorXd& v) { return VectorXd(a * v); }, b, 10);
  EXPECT_LT((a * x - b).norm(), 1e-9);
}

TEST(Trpo, AcceptedStepsRespectKlBound) {
  std::mt19937_64 rng(21);
  AlgoConfig cfg;
  int accepted = 0;
  for (int trial = 0; trial < 30; ++trial) {
    GaussianPolicy p = small_policy(rng);
    RolloutBatch b = make_batch(p, 64, rng);
    const VectorXd theta = p.flat();
    const UpdateStats st = trpo_policy_step(p, b, cfg);
    if (st.accepted) {
      ++accepted;
      EXPECT_LE(mean_kl(p, b), cfg.trpo_delta);
      EXPECT_GT(surrogate(p, b), surrogate(with_flat(p, theta), b));
    } else {
      EXPECT_EQ(p.flat(), theta);
    }
  }
  EXPECT_GT(accepted, 20);
}

TEST(Trpo, RejectedUpdateIsBitIdentical) {
  std::mt19937_64 rng(22);
  GaussianPolicy p = small_policy(rng);
  RolloutBatch b = make_batch(p, 32, rng);
  b.advantages.setZero();  // nothing can improve the surrogate
  const GaussianPolicy before = p;
  const UpdateStats st = trpo_policy_step(p, b, AlgoConfig{});
  EXPECT_FALSE(st.accepted);
  EXPECT_EQ(p, before);

}

// ---------------------------------------------------------------------- ddpg

TransitionBatch four_transitions() {
  std::mt19937_64 rng(23);
  TransitionBatch b;
  b.obs = random_matrix(30, 4, rng);
  b.actions = random_matrix(7, 4, rng, 0.3);
  b.next_obs = random_matrix(30, 4, rng);
  b.rewards = (VectorXd(4) << -0.5, -0.1, -0.3, 0.0).finished();
  b.dones = (VectorXd(4) << 0, 1, 0, 1).finished();
  return b;
}

TEST(Ddpg, TerminalAndZeroDiscountTargets) {
  std::mt19937_64 rng(24);
  AlgoConfig cfg;
  cfg.hidden = {8};
  const DdpgLearner l = make_ddpg_learner(cfg, rng);
  const TransitionBatch b = four_transitions();
  const VectorXd y = ddpg_targets(l, b, 0.99);
  EXPECT_EQ(y(1), b.rewards(1));
  EXPECT_EQ(y(3), b.rewards(3));
  MatrixXd x0(37, 1);
  x0 << b.next_obs.col(0), actor_actions(l.actor_target, b.next_obs.col(0));
  EXPECT_NEAR(y(0), b.rewards(0) + 0.99 * l.q_target.forward(x0.col(0))(0), 1e-14);
  const VectorXd y0 = ddpg_targets(l, b, 0.0);
  EXPECT_EQ(y0, b.rewards);
}

TEST(Ddpg, QLossMatchesHandEvaluation) {
  // Q(s, a) = sum of inputs for a one-layer net with unit weights.
  Mlp q({37, 1});
  q.weight(0).setOnes();
  TransitionBatch b = four_transitions();
  const VectorXd y = (VectorXd(4) << 1.0, -2.0, 0.5, 0.0).finished();
  double expected = 0;
  for (int i = 0; i < 4; ++i) {
    const double qi = b.obs.col(i).sum() + b.actions.col(i).sum();
    expected += (qi - y(i)) * (qi - y(i));
  }
  EXPECT_NEAR(q_loss(q, b.obs, b.actions, y), expected / 4.0, 1e-10);
}

TEST(Ddpg, PolyakExtremes) {
  std::mt19937_64 rng(25);
  const Mlp live = Mlp::random({3, 4, 1}, rng);
  Mlp target = Mlp::random({3, 4, 1}, rng);
  const Mlp original = target;
  polyak_update(target, live, 0.0);
  EXPECT_EQ(target, original);
  polyak_update(target, live, 1.0);
  EXPECT_EQ(target, live);
  Mlp half = original;
  polyak_update(half, live, 0.5);
  EXPECT_TRUE(half.params().isApprox(0.5 * (live.params() + original.params()), 1e-15));
}

TEST(Ddpg, UpdateNeedsFullBatch) {
  std::mt19937_64 rng(26);
  AlgoConfig cfg;
  cfg.hidden = {8};
  cfg.batch_size = 4;
  DdpgLearner l = make_ddpg_learner(cfg, rng);
  ReplayBuffer buf(10);
  for (int i = 0; i < 3; ++i) buf.push(Transition{});
  try {
    ddpg_update(l, buf, cfg, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBufferTooSmall);
  }
  buf.push(Transition{});
  EXPECT_NO_THROW(ddpg_update(l, buf, cfg, rng));
}

TEST(Ddpg, TargetsFollowLiveNetworksWithUnitTau) {
  std::mt19937_64 rng(27);
  AlgoConfig cfg;
  cfg.hidden = {8};
  cfg.batch_size = 4;
  cfg.ddpg_tau = 1.0;
  DdpgLearner l = make_ddpg_learner(cfg, rng);
  ReplayBuffer buf(16);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.reward = -0.1 * i;
    t.obs[0] = 0.1 * i;
    buf.push(t);
  }
  ddpg_update(l, buf, cfg, rng);
  EXPECT_EQ(l.actor_target, l.actor);
  EXPECT_EQ(l.q_target, l.q);
  cfg.ddpg_tau = 0.0;
  const Mlp frozen = l.q_target;
  ddpg_update(l, buf, cfg, rng);
  EXPECT_EQ(l.q_target, frozen);
  EXPECT_NE(l.q, frozen);
}

TEST(ReplayBuffer, OverwritesOldestWhenFull) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buf.push(t);
  }
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf[0].reward, 3.0);
  EXPECT_EQ(buf[1].reward, 4.0);
  EXPECT_EQ(buf[2].reward, 2.0);
}

TEST(AlgoConfig, Validation) {
  AlgoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = AlgoConfig{};
  c.ppo_epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_algo("trpo"), Algo::kTrpo);
  try {
    parse_algo("xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

}  // namespace
}  // namespace toolkin::rl
