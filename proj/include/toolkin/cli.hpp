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
// Command-line front end. Every subcommand is reachable through run() so the
// tests can drive it in-process; main() only forwards argv.

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "toolkin/env.hpp"
#include "toolkin/rl/algos.hpp"
#include "toolkin/trajectory.hpp"

namespace toolkin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv and runs one subcommand. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Contents of a --config file:
///   {"env": {...EnvSpec fields...}, "algo": {...AlgoConfig fields...},
///    "chain": "relative/or/absolute/chain.json", "seed": 1}
/// Every key is optional. Relative chain paths resolve against the config's
/// directory and must exist.
struct RunConfig {
  env::EnvSpec spec;
  rl::AlgoConfig algo;
  std::filesystem::path chain_path;  // empty when the built-in chain is used
};

RunConfig load_run_config(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);              // throws kIoError
void write_text(const std::filesystem::path& path, std::string_view text);  // throws kIoError

/// Numeric CSV. The first row is a header unless every field parses as a
/// number; '#' lines and blank lines are skipped. Throws kParseError on
/// ragged rows, bad numbers or a table without data rows.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};
Table parse_table(std::string_view text);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

/// Quartiles by linear interpolation between order statistics; whiskers
/// reach the most extreme points within 1.5 IQR of the box.
struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_lo = 0, whisker_hi = 0;
  std::vector<double> outliers;
};
BoxStats box_stats(std::vector<double> values);  // throws kEmptyList
double quantile_sorted(const std::vector<double>& sorted, double p);

std::string svg_curves(const std::vector<Series>& series, std::string_view title);
std::string svg_trajectories(const std::vector<traj::Trajectory>& trajs, std::string_view title);
std::string svg_boxes(const std::vector<std::string>& names, const std::vector<BoxStats>& boxes,
                      std::string_view title);

}  // namespace toolkin::cli
