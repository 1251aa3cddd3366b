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

// Training loops, deterministic evaluation and checkpoint files.

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "toolkin/env.hpp"
#include "toolkin/rl/algos.hpp"

namespace toolkin::rl {

struct Checkpoint {
  Algo algo = Algo::kPpo;
  Mlp actor;         // policy mean (on-policy) or deterministic actor (ddpg)
  VectorXd log_std;  // empty for ddpg
  Mlp critic;        // V(s) or Q(s, a)
  Mlp actor_target;  // ddpg only
  Mlp critic_target; // ddpg only
  RunningNorm obs_norm{env::kObsDim};
  AlgoConfig config;
  env::EnvSpec env;
  long steps_trained = 0;
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> curve;  // (step, mean episode return)
};

std::string config_to_json(const AlgoConfig& cfg);
AlgoConfig config_from_json(std::string_view text);  // partial objects keep defaults

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(std::string_view text);  // throws kParseError
Checkpoint load_checkpoint(const std::string& path);     // throws kIoError / kParseError
void save_checkpoint(const Checkpoint& c, const std::string& path);

/// Fresh networks for `algo` drawn from `cfg.seed`.
Checkpoint initial_checkpoint(Algo algo, const env::EnvSpec& spec, const AlgoConfig& cfg);

/// Deterministic action in policy units: the clipped Gaussian mean, or the
/// squashed actor output.
std::array<double, env::kActDim> policy_action(const Checkpoint& c, const env::Observation& obs);

using ProgressFn = std::function<void(long step, double mean_return)>;

/// Runs the collection/update loop for cfg.total_steps environment steps.
/// Starts from cfg.init_checkpoint when set (throws kCheckpointMismatch when
/// the algorithm or network shapes differ).
Checkpoint train(Algo algo, const env::EnvSpec& spec, const AlgoConfig& cfg,
                 const ProgressFn& progress = {});

/// Same, continuing from `init` instead of reading a file.
Checkpoint train_from(const Checkpoint& init, Algo algo, const env::EnvSpec& spec,
                      const AlgoConfig& cfg, const ProgressFn& progress = {});

struct EvalResult {
  int episodes = 0;
  double mean_final_distance = 0;  // box to goal at episode end, meters
  double mean_travel = 0;          // box displacement from its start, meters
  double success_rate = 0;
  double mean_return = 0;
};

using Controller = std::function<env::Action(const env::EnvState&)>;

/// Seed of evaluation episode i; disjoint from the training streams.
std::uint64_t eval_episode_seed(int i);

EvalResult evaluate_controller(const Controller& controller, const env::EnvSpec& spec, int episodes);
/// Single-threaded reference for evaluate_controller; results are identical.
EvalResult evaluate_controller_serial(const Controller& controller, const env::EnvSpec& spec, int episodes);
EvalResult evaluate(const Checkpoint& c, const env::EnvSpec& spec, int episodes);

}  // namespace toolkin::rl
