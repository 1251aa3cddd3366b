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
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "toolkin/cli.hpp"
#include "toolkin/error.hpp"
#include "toolkin/rl/train.hpp"
#include "toolkin/toolvision.hpp"

namespace toolkin::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const std::vector<std::string> kAlgos{"a2c", "trpo", "ppo", "ddpg"};
const std::vector<std::string> kVariants{"env1", "env2", "env3"};

struct TrainArgs {
  std::string algo, env, config, init, out, curve;
  long steps = 0;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string ckpt, env, out;
  int episodes = 100;
};

struct ExportArgs {
  std::string ckpt, out;
  int episodes = 100, smooth_k = 5, max_attempts = 0;
  bool complete_only = false;
  double tool_length = -1;
};

struct RetargetArgs {
  std::string traj, out;
  double length = 0;
};

struct ReplayArgs {
  std::string traj, env = "env1", config, report;
  std::uint64_t seed = 0;
};

struct DetectArgs {
  std::vector<std::string> images;
  double mpp = 0;
  vision::MeasureOptions opt;
  std::string edge = "centroid";
};

struct PlotArgs {
  std::vector<std::string> in;
  std::string kind, out, title;
};

struct SynthArgs {
  std::string out;
  int width = 640, height = 480, ax = 100, ay = 240, bx = 540, by = 240, marker = 12;
  std::int64_t noise_seed = -1;
  bool no_shaft = false;
};

// Curve CSV sits next to the checkpoint unless --curve says otherwise.
fs::path curve_path_for(const TrainArgs& a) {
  if (!a.curve.empty()) return a.curve;
  fs::path p = a.out;
  return p.replace_extension().string() + "_curve.csv";
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.env.empty()) rc.spec.variant = env::parse_variant(a.env);
  rc.algo.total_steps = a.steps;
  rc.algo.seed = a.seed;
  if (!a.init.empty()) rc.algo.init_checkpoint = a.init;
  const rl::Checkpoint c = rl::train(rl::parse_algo(a.algo), rc.spec, rc.algo);
  rl::save_checkpoint(c, a.out);
  std::string csv = "step,mean_return\n";
  for (const auto& [step, ret] : c.curve) csv += num(step) + "," + num(ret) + "\n";
  const fs::path curve = curve_path_for(a);
  write_text(curve, csv);
  out << "trained " << a.algo << " on " << env::to_string(rc.spec.variant) << " for " << c.steps_trained
      << " steps; checkpoint " << a.out << ", curve " << curve.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const rl::Checkpoint c = rl::load_checkpoint(a.ckpt);
  env::EnvSpec spec = c.env;
  if (!a.env.empty()) spec.variant = env::parse_variant(a.env);
  const rl::EvalResult r = rl::evaluate(c, spec, a.episodes);
  const std::string csv = "episodes,mean_final_distance_m,mean_travel_m,success_rate\n" + std::to_string(r.episodes) +
                          "," + num(r.mean_final_distance) + "," + num(r.mean_travel) + "," + num(r.success_rate) + "\n";
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text(a.out, csv);
    out << "episodes " << r.episodes << ": mean final distance " << num(r.mean_final_distance) << " m, travel "
        << num(r.mean_travel) << " m, success " << num(r.success_rate) << "\n";
  }
  return kExitOk;
}

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const rl::Checkpoint c = rl::load_checkpoint(a.ckpt);
  const auto trajs = traj::record_rollouts(c, c.env, a.episodes, a.complete_only, a.max_attempts);
  const traj::Trajectory avg = traj::average_trajectory(trajs);
  const double reach_length = a.tool_length >= 0 ? a.tool_length : c.env.tool_length_sim;
  const traj::Trajectory smooth = traj::smooth_filter(avg, a.smooth_k, c.env.chain, reach_length, c.env.tracking_ik);
  write_text(a.out, traj::export_csv(smooth));
  out << "averaged " << trajs.size() << " episodes into " << avg.waypoints.size() << " samples; kept "
      << smooth.waypoints.size() << " waypoints in " << a.out << "\n";
  return kExitOk;
}

int cmd_retarget(const RetargetArgs& a, std::ostream& out) {
  const traj::Trajectory t = traj::import_csv(read_text(a.traj));
  write_text(a.out, traj::export_csv(traj::retarget(t, a.length)));
  out << "retargeted " << t.waypoints.size() << " waypoints from tool length " << num(t.tool_length) << " m to "
      << num(a.length) << " m\n";
  return kExitOk;
}

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  const traj::Trajectory t = traj::import_csv(read_text(a.traj));
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  rc.spec.variant = env::parse_variant(a.env);
  traj::ReplayOptions opt;
  opt.seed = a.seed;
  const traj::ReplayReport r = traj::replay(t, rc.spec, opt);
  if (!a.report.empty()) write_text(a.report, traj::report_to_json(r));
  out << "box_travel_m " << num(r.box_travel) << "\nfinal_box_goal_distance_m " << num(r.final_box_goal_distance)
      << "\nwaypoints_reached " << r.waypoints_reached << "/" << r.waypoints_attempted << "\nik_failures "
      << r.ik_failures << "\n";
  return kExitOk;
}

int cmd_detect(DetectArgs a, std::ostream& out) {
  a.opt.edge_mode = a.edge == "outer" ? vision::EdgeMode::kOuter : vision::EdgeMode::kCentroid;
  a.opt.thresholds.validate();
  std::vector<double> lengths;
  for (const std::string& path : a.images) {
    lengths.push_back(vision::measure_length(vision::read_ppm_file(path), a.opt, a.mpp));
  }
  const vision::CalibratedMeasurement m = vision::average_length(lengths);
  for (std::size_t i = 0; i < a.images.size(); ++i) out << a.images[i] << " " << num(lengths[i]) << " m\n";
  out << "mean " << num(m.length) << " m\n";
  return kExitOk;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  std::string svg;
  if (a.kind == "curve") {
    std::vector<Series> series;
    for (const std::string& p : a.in) {
      const Table t = parse_table(read_text(p));
      if (t.columns.size() < 2) throw Error(ErrorCode::kParseError, p + ": curve needs step and value columns");
      series.push_back({fs::path(p).stem().string(), t.columns[0], t.columns[1]});
    }
    svg = svg_curves(series, a.title.empty() ? "Learning curves" : a.title);
  } else if (a.kind == "traj3d") {
    std::vector<traj::Trajectory> trajs;
    for (const std::string& p : a.in) trajs.push_back(traj::import_csv(read_text(p)));
    svg = svg_trajectories(trajs, a.title.empty() ? "Gripper trajectories (top and side views)" : a.title);
  } else {
    std::vector<std::string> names;
    std::vector<BoxStats> boxes;
    for (const std::string& p : a.in) {
      const Table t = parse_table(read_text(p));
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        names.push_back(t.names[i]);
        boxes.push_back(box_stats(t.columns[i]));
      }
    }
    svg = svg_boxes(names, boxes, a.title.empty() ? "Box travel" : a.title);
  }
  write_text(a.out, svg);
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  vision::SynthOptions opt;
  opt.draw_shaft = !a.no_shaft;
  if (a.noise_seed >= 0) opt.noise_seed = static_cast<std::uint64_t>(a.noise_seed);
  const vision::SynthImage img = vision::synth_tool_image(a.width, a.height, {a.ax, a.ay, a.marker, a.marker},
                                                          {a.bx, a.by, a.marker, a.marker}, opt);
  vision::write_ppm_file(a.out, img.image);
  out << "ground_truth_px " << num(img.ground_truth_px) << "\n";
  return kExitOk;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

RunConfig load_run_config(const fs::path& path) {
  const std::string text = read_text(path);
  RunConfig rc;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kConfigError, path.string() + ": expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "env" && key != "algo" && key != "chain" && key != "seed") {
      throw Error(ErrorCode::kConfigError, path.string() + ": unknown key '" + key + "'");
    }
  }
  if (doc.contains("env")) rc.spec = env::spec_from_json(doc["env"].dump());
  if (doc.contains("algo")) rc.algo = rl::config_from_json(doc["algo"].dump());
  if (doc.contains("seed")) rc.algo.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("chain")) {
    fs::path chain = doc["chain"].get<std::string>();
    if (chain.is_relative()) chain = path.parent_path() / chain;
    if (!fs::exists(chain)) throw Error(ErrorCode::kConfigError, "chain file not found: " + chain.string());
    rc.chain_path = chain;
    rc.spec.chain = kin::load_chain(read_text(chain));
  }
  rc.spec.validate();
  rc.algo.validate();
  return rc;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tool-mediated box pushing: training, evaluation, trajectory transfer and tool measurement"};
  app.name("toolkin");
  app.require_subcommand(1);

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "train a policy and write a checkpoint plus its learning curve");
  train->add_option("--algo", tr.algo, "learning algorithm")->required()->check(CLI::IsMember(kAlgos));
  train->add_option("--env", tr.env, "environment variant")->check(CLI::IsMember(kVariants));
  train->add_option("--steps", tr.steps, "environment steps")->required()->check(CLI::NonNegativeNumber);
  train->add_option("--seed", tr.seed, "master seed")->required();
  train->add_option("--config", tr.config, "run config JSON");
  train->add_option("--init", tr.init, "checkpoint to fine-tune from");
  train->add_option("--out", tr.out, "checkpoint path")->required();
  train->add_option("--curve", tr.curve, "learning curve CSV (default: <out>_curve.csv)");

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint with its deterministic policy");
  eval->add_option("--ckpt", ev.ckpt, "checkpoint path")->required();
  eval->add_option("--episodes", ev.episodes, "episode count")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--env", ev.env, "override the checkpoint's environment variant")->check(CLI::IsMember(kVariants));
  eval->add_option("--out", ev.out, "CSV path (stdout when omitted)");

  ExportArgs ex;
  CLI::App* exp = app.add_subcommand("export-traj", "record, average and smooth policy rollouts into a trajectory CSV");
  exp->add_option("--ckpt", ex.ckpt, "checkpoint path")->required();
  exp->add_option("--episodes", ex.episodes, "episodes to average")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_flag("--complete-only", ex.complete_only, "keep only episodes that reach the goal");
  exp->add_option("--smooth-k", ex.smooth_k, "keep every k-th waypoint")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--tool-length", ex.tool_length, "tool length used for the reachability check (default: trained length)")
      ->check(CLI::NonNegativeNumber);
  exp->add_option("--max-attempts", ex.max_attempts, "episode cap with --complete-only (default: 10 x episodes)")
      ->check(CLI::NonNegativeNumber);
  exp->add_option("--out", ex.out, "trajectory CSV")->required();

  RetargetArgs rt;
  CLI::App* ret = app.add_subcommand("retarget", "shift a trajectory to a different tool length");
  ret->add_option("--traj", rt.traj, "input trajectory CSV")->required();
  ret->add_option("--real-tool-length", rt.length, "tool length in meters")->required()->check(CLI::NonNegativeNumber);
  ret->add_option("--out", rt.out, "output trajectory CSV")->required();

  ReplayArgs rp;
  CLI::App* rep = app.add_subcommand("replay", "drive the simulator through a trajectory's waypoints");
  rep->add_option("--traj", rp.traj, "trajectory CSV")->required();
  rep->add_option("--env", rp.env, "environment variant")->capture_default_str()->check(CLI::IsMember(kVariants));
  rep->add_option("--config", rp.config, "run config JSON for environment overrides");
  rep->add_option("--seed", rp.seed, "environment reset seed")->capture_default_str();
  rep->add_option("--report", rp.report, "report JSON path");

  DetectArgs dt;
  CLI::App* det = app.add_subcommand("detect-length", "measure a tool from three marker images");
  det->add_option("--images", dt.images, "three PPM images")->required()->expected(3);
  det->add_option("--mpp", dt.mpp, "meters per pixel")->required()->check(CLI::PositiveNumber);
  det->add_option("--hue-lo", dt.opt.thresholds.hue_lo, "lower hue bound, degrees")->capture_default_str();
  det->add_option("--hue-hi", dt.opt.thresholds.hue_hi, "upper hue bound, degrees")->capture_default_str();
  det->add_option("--sat-min", dt.opt.thresholds.sat_min, "minimum saturation")->capture_default_str();
  det->add_option("--val-min", dt.opt.thresholds.val_min, "minimum value")->capture_default_str();
  det->add_option("--min-area", dt.opt.min_area, "minimum blob area, pixels")->capture_default_str();
  det->add_option("--edge", dt.edge, "distance between marker centroids or outer edges")
      ->capture_default_str()
      ->check(CLI::IsMember({"centroid", "outer"}));

  PlotArgs pl;
  CLI::App* plot = app.add_subcommand("plot", "render learning curves, trajectories or box plots as SVG");
  plot->add_option("--in", pl.in, "input CSV files")->required();
  plot->add_option("--kind", pl.kind, "plot kind")->required()->check(CLI::IsMember({"curve", "traj3d", "box"}));
  plot->add_option("--title", pl.title, "plot title");
  plot->add_option("--out", pl.out, "SVG path")->required();

  SynthArgs sy;
  CLI::App* syn = app.add_subcommand("synth-image", "render a synthetic two-marker tool image");
  syn->add_option("--out", sy.out, "PPM path")->required();
  syn->add_option("--width", sy.width)->capture_default_str();
  syn->add_option("--height", sy.height)->capture_default_str();
  syn->add_option("--ax", sy.ax, "first marker center x")->capture_default_str();
  syn->add_option("--ay", sy.ay, "first marker center y")->capture_default_str();
  syn->add_option("--bx", sy.bx, "second marker center x")->capture_default_str();
  syn->add_option("--by", sy.by, "second marker center y")->capture_default_str();
  syn->add_option("--marker", sy.marker, "marker side, pixels")->capture_default_str();
  syn->add_option("--noise-seed", sy.noise_seed, "background noise seed (negative: none)")->capture_default_str();
  syn->add_flag("--no-shaft", sy.no_shaft, "omit the dark tool shaft");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(tr, out);
    if (eval->parsed()) return cmd_eval(ev, out);
    if (exp->parsed()) return cmd_export(ex, out);
    if (ret->parsed()) return cmd_retarget(rt, out);
    if (rep->parsed()) return cmd_replay(rp, out);
    if (det->parsed()) return cmd_detect(dt, out);
    if (plot->parsed()) return cmd_plot(pl, out);
    if (syn->parsed()) return cmd_synth(sy, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace toolkin::cli
