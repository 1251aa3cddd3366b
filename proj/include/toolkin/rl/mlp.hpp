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

// Fully connected network, tanh hidden layers, linear output. All parameters
// live in one flat vector; per-layer weights and biases are views into it.

#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace toolkin::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Mlp {
 public:
  using MatMap = Eigen::Map<MatrixXd>;
  using ConstMatMap = Eigen::Map<const MatrixXd>;
  using VecMap = Eigen::Map<VectorXd>;
  using ConstVecMap = Eigen::Map<const VectorXd>;

  Mlp() = default;
  /// Zero-initialized network. Throws kInvalidSpec for fewer than two sizes
  /// or a non-positive size.
  explicit Mlp(std::vector<int> sizes);

  /// Scaled-normal weights (std 1/sqrt(fan_in)), zero biases; the last layer
  /// is further scaled by `out_gain`.
  static Mlp random(std::vector<int> sizes, std::mt19937_64& rng, double out_gain = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_params() const { return params_.size(); }

  const VectorXd& params() const { return params_; }
  VectorXd& params() { return params_; }
  void set_params(const VectorXd& p);  // throws kDimensionMismatch

  // Layer l maps sizes[l] -> sizes[l+1]; weight is out x in.
  MatMap weight(int l);
  ConstMatMap weight(int l) const;
  VecMap bias(int l);
  ConstVecMap bias(int l) const;

  VectorXd forward(const VectorXd& x) const;
  /// Columns are samples.
  MatrixXd forward_batch(const MatrixXd& x) const;

  struct Tape {
    std::vector<MatrixXd> act;  // act[0] = input, act[l+1] = output of layer l
  };
  MatrixXd forward_batch(const MatrixXd& x, Tape& tape) const;

  /// Reverse pass over a recorded forward pass. Adds dL/dparams into `grad`
  /// and returns dL/dinput.
  MatrixXd backward(const Tape& tape, const MatrixXd& upstream, VectorXd& grad) const;

  bool operator==(const Mlp& o) const { return sizes_ == o.sizes_ && params_ == o.params_; }

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offset_;  // start of layer l's weights; bias follows
  VectorXd params_;
};

struct MlpGradients {
  VectorXd params;
  MatrixXd input;
};

/// Gradients of sum_i <upstream_i, net(x_i)>. Samples are processed in fixed
/// chunks across the worker pool and reduced in chunk order, so the result
/// does not depend on the thread count.
MlpGradients mlp_gradients(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream);

/// Reference: one sample at a time, plain loops, no batching.
MlpGradients mlp_gradients_serial(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream);

/// Chunk width used by the batched kernels.
inline constexpr Eigen::Index kGradChunk = 64;

}  // namespace toolkin::rl
