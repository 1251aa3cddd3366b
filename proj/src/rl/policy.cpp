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
#include "toolkin/rl/policy.hpp"

#include <cmath>
#include <numbers>

#include "toolkin/error.hpp"

namespace toolkin::rl {

GaussianPolicy::GaussianPolicy(Mlp mean_net, double initial_log_std)
    : mean(std::move(mean_net)), log_std(VectorXd::Constant(mean.output_dim(), initial_log_std)) {
  clamp_log_std();
}

void GaussianPolicy::clamp_log_std() { log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax); }

VectorXd GaussianPolicy::flat() const {
  VectorXd p(num_params());
  p << mean.params(), log_std;
  return p;
}

void GaussianPolicy::set_flat(const VectorXd& p) {
  if (p.size() != num_params()) {
    throw Error(ErrorCode::kDimensionMismatch, "policy parameter vector has the wrong length");
  }
  mean.set_params(p.head(mean.num_params()));
  log_std = p.tail(log_std.size());
  clamp_log_std();
}

PolicySample sample_action(const GaussianPolicy& policy, const VectorXd& obs, std::mt19937_64& rng) {
  PolicySample s;
  s.mean = policy.mean.forward(obs);
  std::normal_distribution<double> n(0.0, 1.0);
  s.action.resize(s.mean.size());
  for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
    s.action(i) = s.mean(i) + std::exp(policy.log_std(i)) * n(rng);
  }
  s.logprob = gaussian_logprob(s.mean, policy.log_std, s.action)(0);
  return s;
}

VectorXd gaussian_logprob(const MatrixXd& means, const VectorXd& log_std, const MatrixXd& actions) {
  if (means.rows() != log_std.size() || actions.rows() != means.rows() ||
      actions.cols() != means.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "action and mean shapes differ");
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const VectorXd inv_std = (-log_std).array().exp();
  const double norm = -log_std.sum() - half_log_2pi * static_cast<double>(log_std.size());
  const MatrixXd z = (actions - means).array().colwise() * inv_std.array();
  return (norm - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
}

double gaussian_entropy(const VectorXd& log_std) {
  const double per_dim = 0.5 + 0.5 * std::log(2.0 * std::numbers::pi);
  return log_std.sum() + per_dim * static_cast<double>(log_std.size());
}

void RunningNorm::update(const MatrixXd& batch) {
  if (batch.cols() == 0) return;
  if (batch.rows() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "normalizer and batch widths differ");
  }
  const double n = static_cast<double>(batch.cols());
  const VectorXd bmean = batch.rowwise().mean();
  const VectorXd bvar = (batch.colwise() - bmean).rowwise().squaredNorm() / n;
  const double total = count + n;
  const VectorXd delta = bmean - mean;
  // Pairwise merge of two sample moments.
  var = (var * count + bvar * n + delta.cwiseAbs2() * (count * n / total)) / total;
  mean += delta * (n / total);
  count = total;
}

MatrixXd RunningNorm::apply(const MatrixXd& x) const {
  const VectorXd inv = (var.array() + 1e-8).rsqrt();
  return ((x.colwise() - mean).array().colwise() * inv.array()).cwiseMax(-clip).cwiseMin(clip);
}

VectorXd RunningNorm::apply(const VectorXd& x) const {
  return ((x - mean).array() * (var.array() + 1e-8).rsqrt()).cwiseMax(-clip).cwiseMin(clip);
}

void Adam::step(VectorXd& params, const VectorXd& grad) {
  if (m.size() != params.size()) {
    m = VectorXd::Zero(params.size());
    v = VectorXd::Zero(params.size());
    t = 0;
  }
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

double clip_grad_norm(VectorXd& g, double max_norm) {
  const double n = g.norm();
  if (n > max_norm && n > 0) g *= max_norm / n;
  return n;
}

}  // namespace toolkin::rl
