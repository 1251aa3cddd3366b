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
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "toolkin/error.hpp"
#include "toolkin/rl/train.hpp"

namespace toolkin::rl {
namespace {

using json = nlohmann::json;

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weight(l);
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
      rows.push_back(std::move(row));
    }
    const auto b = net.bias(l);
    layers.push_back({{"w", std::move(rows)}, {"b", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return layers;
}

Mlp mlp_from_json(const json& j, const std::vector<int>& sizes) {
  Mlp net(sizes);
  if (!j.is_array() || static_cast<int>(j.size()) != net.num_layers()) {
    throw Error(ErrorCode::kParseError, "layer count does not match the architecture");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    auto b = net.bias(l);
    const json& rows = j[l].at("w");
    const json& bias = j[l].at("b");
    if (rows.size() != static_cast<std::size_t>(w.rows()) || bias.size() != static_cast<std::size_t>(b.size())) {
      throw Error(ErrorCode::kParseError, "layer shape does not match the architecture");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const json& row = rows[static_cast<std::size_t>(i)];
      if (row.size() != static_cast<std::size_t>(w.cols())) {
        throw Error(ErrorCode::kParseError, "layer shape does not match the architecture");
      }
      for (Eigen::Index k = 0; k < w.cols(); ++k) w(i, k) = row[static_cast<std::size_t>(k)].get<double>();
      b(i) = bias[static_cast<std::size_t>(i)].get<double>();
    }
  }
  if (!net.params().allFinite()) throw Error(ErrorCode::kParseError, "non-finite network parameter");
  return net;
}

json config_json(const AlgoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"lr_policy", c.lr_policy},
          {"lr_value", c.lr_value},
          {"ppo_clip", c.ppo_clip},
          {"ppo_epochs", c.ppo_epochs},
          {"minibatch", c.minibatch},
          {"trpo_delta", c.trpo_delta},
          {"cg_iters", c.cg_iters},
          {"backtrack_steps", c.backtrack_steps},
          {"backtrack_coeff", c.backtrack_coeff},
          {"ddpg_tau", c.ddpg_tau},
          {"buffer_capacity", c.buffer_capacity},
          {"batch_size", c.batch_size},
          {"exploration_sigma", c.exploration_sigma},
          {"rollout_horizon", c.rollout_horizon},
          {"total_steps", c.total_steps},
          {"seed", c.seed},
          {"num_envs", c.num_envs},
          {"a2c_steps", c.a2c_steps},
          {"entropy_coef", c.entropy_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"value_epochs", c.value_epochs},
          {"cg_damping", c.cg_damping},
          {"fvp_step", c.fvp_step},
          {"ddpg_start_steps", c.ddpg_start_steps},
          {"ddpg_update_after", c.ddpg_update_after},
          {"init_log_std", c.init_log_std},
          {"normalize_obs", c.normalize_obs},
          {"hidden", c.hidden},
          {"curve_interval", c.curve_interval},
          {"init_checkpoint", c.init_checkpoint}};
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

AlgoConfig config_parse(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "algorithm config must be a JSON object");
  AlgoConfig c;
  try {
    read(j, "gamma", c.gamma);
    read(j, "gae_lambda", c.gae_lambda);
    read(j, "lr_policy", c.lr_policy);
    read(j, "lr_value", c.lr_value);
    read(j, "ppo_clip", c.ppo_clip);
    read(j, "ppo_epochs", c.ppo_epochs);
    read(j, "minibatch", c.minibatch);
    read(j, "trpo_delta", c.trpo_delta);
    read(j, "cg_iters", c.cg_iters);
    read(j, "backtrack_steps", c.backtrack_steps);
    read(j, "backtrack_coeff", c.backtrack_coeff);
    read(j, "ddpg_tau", c.ddpg_tau);
    read(j, "buffer_capacity", c.buffer_capacity);
    read(j, "batch_size", c.batch_size);
    read(j, "exploration_sigma", c.exploration_sigma);
    read(j, "rollout_horizon", c.rollout_horizon);
    read(j, "total_steps", c.total_steps);
    read(j, "seed", c.seed);
    read(j, "num_envs", c.num_envs);
    read(j, "a2c_steps", c.a2c_steps);
    read(j, "entropy_coef", c.entropy_coef);
    read(j, "max_grad_norm", c.max_grad_norm);
    read(j, "value_epochs", c.value_epochs);
    read(j, "cg_damping", c.cg_damping);
    read(j, "fvp_step", c.fvp_step);
    read(j, "ddpg_start_steps", c.ddpg_start_steps);
    read(j, "ddpg_update_after", c.ddpg_update_after);
    read(j, "init_log_std", c.init_log_std);
    read(j, "normalize_obs", c.normalize_obs);
    read(j, "hidden", c.hidden);
    read(j, "curve_interval", c.curve_interval);
    read(j, "init_checkpoint", c.init_checkpoint);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<int> arch(const Mlp& net) { return net.sizes(); }

}  // namespace

std::string config_to_json(const AlgoConfig& cfg) { return config_json(cfg).dump(2); }

AlgoConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config is not valid JSON: ") + e.what());
  }
  return config_parse(j);
}

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["algo"] = to_string(c.algo);
  j["arch"] = {{"actor", arch(c.actor)}, {"critic", arch(c.critic)}};
  j["weights"] = mlp_to_json(c.actor);
  j["log_std"] = std::vector<double>(c.log_std.data(), c.log_std.data() + c.log_std.size());
  if (c.algo == Algo::kDdpg) {
    j["q_weights"] = mlp_to_json(c.critic);
    j["target_weights"] = {{"actor", mlp_to_json(c.actor_target)}, {"q", mlp_to_json(c.critic_target)}};
  } else {
    j["value_weights"] = mlp_to_json(c.critic);
  }
  j["obs_norm"] = {{"mean", std::vector<double>(c.obs_norm.mean.data(), c.obs_norm.mean.data() + c.obs_norm.mean.size())},
                   {"var", std::vector<double>(c.obs_norm.var.data(), c.obs_norm.var.data() + c.obs_norm.var.size())},
                   {"count", c.obs_norm.count}};
  j["config"] = config_json(c.config);
  j["env"] = json::parse(env::spec_to_json(c.env));
  j["steps_trained"] = c.steps_trained;
  j["seed"] = c.seed;
  j["curve"] = c.curve;
  return j.dump();
}

Checkpoint checkpoint_from_json(std::string_view text) {
  Checkpoint c;
  try {
    const json j = json::parse(text);
    c.algo = parse_algo(j.at("algo").get<std::string>());
    const auto actor_sizes = j.at("arch").at("actor").get<std::vector<int>>();
    const auto critic_sizes = j.at("arch").at("critic").get<std::vector<int>>();
    c.actor = mlp_from_json(j.at("weights"), actor_sizes);
    const auto ls = j.at("log_std").get<std::vector<double>>();
    c.log_std = Eigen::Map<const VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    if (c.algo == Algo::kDdpg) {
      c.critic = mlp_from_json(j.at("q_weights"), critic_sizes);
      c.actor_target = mlp_from_json(j.at("target_weights").at("actor"), actor_sizes);
      c.critic_target = mlp_from_json(j.at("target_weights").at("q"), critic_sizes);
    } else {
      c.critic = mlp_from_json(j.at("value_weights"), critic_sizes);
      if (c.log_std.size() != c.actor.output_dim()) {
        throw Error(ErrorCode::kParseError, "log_std length does not match the action size");
      }
    }
    const auto nm = j.at("obs_norm").at("mean").get<std::vector<double>>();
    const auto nv = j.at("obs_norm").at("var").get<std::vector<double>>();
    if (nm.size() != env::kObsDim || nv.size() != env::kObsDim) {
      throw Error(ErrorCode::kParseError, "observation normalizer has the wrong width");
    }
    c.obs_norm.mean = Eigen::Map<const VectorXd>(nm.data(), env::kObsDim);
    c.obs_norm.var = Eigen::Map<const VectorXd>(nv.data(), env::kObsDim);
    c.obs_norm.count = j.at("obs_norm").at("count").get<double>();
    c.config = config_parse(j.at("config"));
    c.env = env::spec_from_json(j.at("env").dump());
    c.steps_trained = j.at("steps_trained").get<long>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.curve = j.at("curve").get<std::vector<std::array<double, 2>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, std::string("malformed checkpoint: ") + e.what());
  }
  if (c.actor.input_dim() != env::kObsDim || c.actor.output_dim() != env::kActDim) {
    throw Error(ErrorCode::kParseError, "checkpoint networks do not match the observation/action sizes");
  }
  return c;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write checkpoint " + path);
  out << checkpoint_to_json(c) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace toolkin::rl
