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

#pragma once

#include <random>

#include "toolkin/rl/mlp.hpp"

namespace toolkin::rl {

/// Diagonal Gaussian over actions: mean from a network, one learnable
/// state-independent log standard deviation per action dimension.
struct GaussianPolicy {
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  Mlp mean;
  VectorXd log_std;

  GaussianPolicy() = default;
  GaussianPolicy(Mlp mean_net, double initial_log_std);

  int action_dim() const { return mean.output_dim(); }
  void clamp_log_std();

  /// Flat parameter view: mean-network parameters followed by log_std.
  VectorXd flat() const;
  void set_flat(const VectorXd& p);  // clamps log_std
  Eigen::Index num_params() const { return mean.num_params() + log_std.size(); }

  bool operator==(const GaussianPolicy&) const = default;
};

struct PolicySample {
  VectorXd action;
  VectorXd mean;
  double logprob = 0;
};

/// a = mean + sigma * z with z standard normal, plus log pi(a|s).
PolicySample sample_action(const GaussianPolicy& policy, const VectorXd& obs, std::mt19937_64& rng);

/// Log-density of each column of `actions` under N(means, diag(exp(log_std))^2).
VectorXd gaussian_logprob(const MatrixXd& means, const VectorXd& log_std, const MatrixXd& actions);

/// Entropy of the diagonal Gaussian (independent of the state).
double gaussian_entropy(const VectorXd& log_std);

/// Running per-feature mean and variance; inputs are standardized and
/// clipped to [-clip, clip]. Starts as the identity map.
struct RunningNorm {
  VectorXd mean;
  VectorXd var;
  double count = 0;
  double clip = 10.0;

  RunningNorm() = default;
  explicit RunningNorm(int dim) : mean(VectorXd::Zero(dim)), var(VectorXd::Ones(dim)) {}

  /// Merges the statistics of a batch (columns are samples).
  void update(const MatrixXd& batch);
  MatrixXd apply(const MatrixXd& x) const;
  VectorXd apply(const VectorXd& x) const;

  bool operator==(const RunningNorm&) const = default;
};

/// Adam on a flat parameter vector; `step` moves against the gradient.
struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  VectorXd m, v;
  long t = 0;

  explicit Adam(double learning_rate = 3e-4) : lr(learning_rate) {}
  void step(VectorXd& params, const VectorXd& grad);
};

/// Rescales `g` in place so its Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(VectorXd& g, double max_norm);

}  // namespace toolkin::rl
