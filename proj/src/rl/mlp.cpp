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
#include "toolkin/rl/mlp.hpp"

#include <cmath>
#include <string>

#include "toolkin/error.hpp"
#include "toolkin/parallel.hpp"

namespace toolkin::rl {
namespace {

void check_input(const Mlp& net, Eigen::Index rows) {
  if (rows != net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "network expects " + std::to_string(net.input_dim()) + " inputs, got " +
                    std::to_string(rows));
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorCode::kInvalidSpec, "a network needs at least one layer");
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw Error(ErrorCode::kInvalidSpec, "layer sizes must be positive");
    }
    offset_.push_back(n);
    n += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = VectorXd::Zero(n);
}

Mlp Mlp::random(std::vector<int> sizes, std::mt19937_64& rng, double out_gain) {
  Mlp net(std::move(sizes));
  std::normal_distribution<double> n(0.0, 1.0);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double scale = (l + 1 == net.num_layers() ? out_gain : 1.0) / std::sqrt(net.sizes_[l]);
    MatMap w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * n(rng);
    }
  }
  return net;
}

void Mlp::set_params(const VectorXd& p) {
  if (p.size() != params_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has the wrong length");
  }
  params_ = p;
}

Mlp::MatMap Mlp::weight(int l) {
  return MatMap(params_.data() + offset_[l], sizes_[l + 1], sizes_[l]);
}
Mlp::ConstMatMap Mlp::weight(int l) const {
  return ConstMatMap(params_.data() + offset_[l], sizes_[l + 1], sizes_[l]);
}
Mlp::VecMap Mlp::bias(int l) {
  return VecMap(params_.data() + offset_[l] + Eigen::Index{sizes_[l + 1]} * sizes_[l], sizes_[l + 1]);
}
Mlp::ConstVecMap Mlp::bias(int l) const {
  return ConstVecMap(params_.data() + offset_[l] + Eigen::Index{sizes_[l + 1]} * sizes_[l],
                     sizes_[l + 1]);
}

VectorXd Mlp::forward(const VectorXd& x) const {
  check_input(*this, x.size());
  VectorXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    VectorXd z = weight(l) * a + bias(l);
    a = l + 1 < num_layers() ? VectorXd(z.array().tanh()) : z;
  }
  return a;
}

MatrixXd Mlp::forward_batch(const MatrixXd& x) const {
  Tape tape;
  return forward_batch(x, tape);
}

MatrixXd Mlp::forward_batch(const MatrixXd& x, Tape& tape) const {
  check_input(*this, x.rows());
  tape.act.resize(num_layers() + 1);
  tape.act[0] = x;
  for (int l = 0; l < num_layers(); ++l) {
    MatrixXd z = weight(l) * tape.act[l];
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) z = z.array().tanh();
    tape.act[l + 1] = std::move(z);
  }
  return tape.act.back();
}

MatrixXd Mlp::backward(const Tape& tape, const MatrixXd& upstream, VectorXd& grad) const {
  if (upstream.rows() != output_dim() || upstream.cols() != tape.act[0].cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "upstream gradient shape does not match the output");
  }
  if (grad.size() != params_.size()) grad = VectorXd::Zero(params_.size());
  MatrixXd delta = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) {
      delta.array() *= 1.0 - tape.act[l + 1].array().square();
    }
    MatMap gw(grad.data() + offset_[l], sizes_[l + 1], sizes_[l]);
    VecMap gb(grad.data() + offset_[l] + Eigen::Index{sizes_[l + 1]} * sizes_[l], sizes_[l + 1]);
    gw.noalias() += delta * tape.act[l].transpose();
    gb += delta.rowwise().sum();
    delta = weight(l).transpose() * delta;
  }
  return delta;
}

MlpGradients mlp_gradients(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream) {
  check_input(net, x.rows());
  if (upstream.rows() != net.output_dim() || upstream.cols() != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "upstream gradient shape does not match the output");
  }
  const Eigen::Index n = x.cols();
  const auto chunks = static_cast<std::size_t>((n + kGradChunk - 1) / kGradChunk);
  std::vector<VectorXd> partial(chunks);
  MlpGradients out{VectorXd::Zero(net.num_params()), MatrixXd(x.rows(), n)};
  parallel_for(chunks, [&](std::size_t c) {
    const Eigen::Index lo = static_cast<Eigen::Index>(c) * kGradChunk;
    const Eigen::Index w = std::min(kGradChunk, n - lo);
    Mlp::Tape tape;
    net.forward_batch(x.middleCols(lo, w), tape);
    partial[c] = VectorXd::Zero(net.num_params());
    out.input.middleCols(lo, w) = net.backward(tape, upstream.middleCols(lo, w), partial[c]);
  });
  for (const VectorXd& g : partial) out.params += g;
  return out;
}

MlpGradients mlp_gradients_serial(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream) {
  check_input(net, x.rows());
  if (upstream.rows() != net.output_dim() || upstream.cols() != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "upstream gradient shape does not match the output");
  }
  const int layers = net.num_layers();
  const std::vector<int>& sz = net.sizes();
  MlpGradients out{VectorXd::Zero(net.num_params()), MatrixXd(x.rows(), x.cols())};
  std::vector<std::vector<double>> act(layers + 1);
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    act[0].assign(x.col(s).data(), x.col(s).data() + x.rows());
    for (int l = 0; l < layers; ++l) {
      auto w = net.weight(l);
      auto b = net.bias(l);
      act[l + 1].assign(sz[l + 1], 0.0);
      for (int i = 0; i < sz[l + 1]; ++i) {
        double z = b(i);
        for (int j = 0; j < sz[l]; ++j) z += w(i, j) * act[l][j];
        act[l + 1][i] = l + 1 < layers ? std::tanh(z) : z;
      }
    }
    std::vector<double> delta(upstream.col(s).data(), upstream.col(s).data() + upstream.rows());
    // Walk the flat layout backwards: weights (column-major) then bias per layer.
    std::vector<Eigen::Index> offset(layers);
    Eigen::Index off = 0;
    for (int l = 0; l < layers; ++l) {
      offset[l] = off;
      off += Eigen::Index{sz[l + 1]} * (sz[l] + 1);
    }
    for (int l = layers - 1; l >= 0; --l) {
      if (l + 1 < layers) {
        for (int i = 0; i < sz[l + 1]; ++i) delta[i] *= 1.0 - act[l + 1][i] * act[l + 1][i];
      }
      auto w = net.weight(l);
      for (int j = 0; j < sz[l]; ++j) {
        for (int i = 0; i < sz[l + 1]; ++i) out.params(offset[l] + j * sz[l + 1] + i) += delta[i] * act[l][j];
      }
      for (int i = 0; i < sz[l + 1]; ++i) out.params(offset[l] + Eigen::Index{sz[l + 1]} * sz[l] + i) += delta[i];
      std::vector<double> prev(sz[l], 0.0);
      for (int j = 0; j < sz[l]; ++j) {
        for (int i = 0; i < sz[l + 1]; ++i) prev[j] += w(i, j) * delta[i];
      }
      delta = std::move(prev);
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.input(i, s) = delta[i];
  }
  return out;
}

}  // namespace toolkin::rl
