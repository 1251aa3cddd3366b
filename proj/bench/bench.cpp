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
// Serial references against their OpenMP counterparts for the three hot
// kernels: MLP gradients, batch IK and evaluation rollouts. Each pair is
// also checked for identical results.
//
//   toolkin_bench [--threads N] [--repeats R]

#include <chrono>
#include <cstdio>
#include <random>

#include "CLI11.hpp"
#include "toolkin/kinematics.hpp"
#include "toolkin/parallel.hpp"
#include "toolkin/rl/mlp.hpp"
#include "toolkin/rl/train.hpp"

namespace {

using namespace toolkin;
using Clock = std::chrono::steady_clock;

template <typename F>
double best_seconds(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-14s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel timings"};
  int threads = 0, repeats = 3;
  app.add_option("--threads", threads, "worker threads (default: TOOLKIN_THREADS or core count)");
  app.add_option("--repeats", repeats, "timing repeats, best is reported")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(threads);
  std::printf("threads %d\n", thread_count());

  std::mt19937_64 rng(7);
  {
    const rl::Mlp net = rl::Mlp::random({30, 64, 64, 8}, rng, 1.0);
    std::normal_distribution<double> g;
    rl::MatrixXd x(30, 4096), up(8, 4096);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = g(rng);
    rl::MlpGradients a, b;
    const double ts = best_seconds(repeats, [&] { a = rl::mlp_gradients_serial(net, x, up); });
    const double tp = best_seconds(repeats, [&] { b = rl::mlp_gradients(net, x, up); });
    // Batched products and the chunked reduction reorder additions, so
    // compare to rounding level.
    const auto close = [](const auto& p, const auto& q) {
      return (p - q).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + p.cwiseAbs().maxCoeff());
    };
    const bool same = close(a.params, b.params) && close(a.input, b.input);
    report("mlp_gradients", ts, tp, same);
  }
  {
    const kin::KinematicChain& chain = kin::default_chain();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<math::Pose> targets;
    std::vector<kin::JointVector> seeds;
    for (int i = 0; i < 256; ++i) {
      kin::JointVector q;
      for (auto& v : q) v = u(rng);
      targets.push_back(kin::forward(chain, q));
      seeds.push_back(kin::JointVector{});
    }
    const kin::IkSettings ik;
    std::vector<kin::JointVector> a, b;
    std::vector<bool> oka, okb;
    const double ts = best_seconds(repeats, [&] { oka = kin::solve_ik_batch_serial(chain, targets, seeds, ik, a); });
    const double tp = best_seconds(repeats, [&] { okb = kin::solve_ik_batch(chain, targets, seeds, ik, b); });
    report("batch_ik", ts, tp, oka == okb && a == b);
  }
  {
    const env::EnvSpec spec;
    rl::AlgoConfig cfg;
    const rl::Checkpoint c = rl::initial_checkpoint(rl::Algo::kPpo, spec, cfg);
    const rl::Controller pi = [&](const env::EnvState& s) {
      return env::scale_action(spec, rl::policy_action(c, env::observe(s)));
    };
    rl::EvalResult a, b;
    const double ts = best_seconds(repeats, [&] { a = rl::evaluate_controller_serial(pi, spec, 64); });
    const double tp = best_seconds(repeats, [&] { b = rl::evaluate_controller(pi, spec, 64); });
    report("rollouts", ts, tp, a.mean_return == b.mean_return && a.mean_travel == b.mean_travel);
  }
  return 0;
}
