// Command-line front end: train, eval, sweep, heatmap, compare.
//
// Every subcommand accepts --config <file> with `key = value` lines named
// after the long options below, and any option given on the command line
// overrides the file.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "w2l/checkpoint.hpp"
#include "w2l/harness.hpp"
#include "w2l/train.hpp"

namespace {

struct Options {
  std::string map;
  std::string planner = "threshold:0.2";
  std::uint64_t seed = 1;
  int episodes = 100;
  double c_hat = 0.4;
  double forward = 0.8;
  double obs_center = 0.68;
  bool noisy_localize = false;
  int particles = 100;
  int cap = 0;
  bool randomize = false;
  int min_separation = 50;
  int horizon = 200;
  std::string threshold_mode = "complement";
  std::string out;

  // train
  std::string learner = "riskrl";
  int budget = 200;
  std::string checkpoint = "checkpoint.bin";
  std::string curve;
  int updates_per_episode = -1;
  int batch_episodes = -1;
  std::string estimator = "outcome";

  // eval
  std::string trace;
  bool greedy = false;

  // sweep
  std::string axis = "risk";
  std::vector<double> values;
  std::vector<std::string> planners;

  // heatmap
  int runs = 250;

  // compare
  std::vector<std::string> maps;
};

w2l::RunConfig run_config(const Options& o) {
  if (o.map.empty()) throw std::invalid_argument("--map is required");
  w2l::RunConfig cfg;
  cfg.map_path = o.map;
  cfg.map = std::make_shared<const w2l::GridMap>(w2l::load_map_file(o.map));
  cfg.planner = o.planner;
  cfg.transition = w2l::TransitionNoise::with_forward(o.forward);
  cfg.observation = w2l::ObservationNoise::with_center(o.obs_center);
  cfg.noiseless_localize = !o.noisy_localize;
  cfg.risk.c_hat = o.c_hat;
  cfg.risk.horizon_T = o.horizon;
  cfg.risk.mode = w2l::parse_threshold_mode(o.threshold_mode);
  cfg.episodes = o.episodes;
  cfg.seed = o.seed;
  cfg.randomize = o.randomize;
  cfg.min_separation = o.min_separation;
  cfg.particles = o.particles;
  cfg.episode_cap = o.cap;
  cfg.validate();
  return cfg;
}

/// Writes to --out when given, otherwise to stdout.
template <typename F>
void emit(const Options& o, F&& write) {
  if (o.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(o.out);
  if (!file) throw std::runtime_error("cannot open " + o.out);
  write(file);
}

int cmd_train(const Options& o) {
  const auto kind = w2l::parse_learner_kind(o.learner);
  w2l::TrainConfig cfg = w2l::TrainConfig::defaults(kind, run_config(o));
  cfg.budget = o.budget;
  if (o.updates_per_episode >= 0) cfg.hyper.updates_per_episode = o.updates_per_episode;
  if (o.batch_episodes > 0) cfg.hyper.batch_episodes = o.batch_episodes;
  cfg.estimator = w2l::parse_constraint_estimator(o.estimator);

  std::unique_ptr<std::ofstream> curve_file;
  if (!o.curve.empty()) curve_file = std::make_unique<std::ofstream>(o.curve);
  const w2l::TrainResult result = w2l::train(cfg, [](const w2l::CurveRow& r) {
    if ((r.episode + 1) % 10 == 0) {
      std::cerr << "episode " << r.episode + 1 << " success=" << r.success
                << " localize=" << r.n_localize << " lambda=" << r.lambda << '\n';
    }
  });
  if (curve_file) w2l::write_curve_csv(*curve_file, result.curve);
  w2l::nn::save_checkpoint(o.checkpoint, w2l::make_checkpoint(cfg, result));
  std::cerr << "wrote " << o.checkpoint << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  const w2l::RunConfig cfg = run_config(o);
  const auto planner = w2l::make_planner(o.planner, o.greedy);
  const bool traces = !o.trace.empty();
  const auto results = w2l::run_campaign(cfg, *planner, traces);
  if (traces) {
    std::ofstream file(o.trace);
    for (std::size_t i = 0; i < results.size(); ++i) {
      w2l::write_trace(file, static_cast<int>(i), results[i]);
    }
  }
  const std::vector<std::pair<std::string, w2l::MetricsSummary>> rows{
      {o.planner, w2l::summarize(results)}};
  emit(o, [&](std::ostream& out) { w2l::write_summary_csv(out, rows); });
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.values.empty()) throw std::invalid_argument("--values is required");
  if (!o.planners.empty() && o.planners.size() != o.values.size()) {
    throw std::invalid_argument("--planners needs one spec per value");
  }
  const w2l::RunConfig base = run_config(o);
  const w2l::SweepAxis axis = w2l::parse_sweep_axis(o.axis);
  // With --planners, value i is evaluated with planner i (e.g. one checkpoint
  // per risk budget); otherwise --planner is used throughout.
  std::size_t next = 0;
  const auto rows = w2l::sweep(base, axis, o.values, [&](const w2l::RunConfig&) {
    const std::string& spec = o.planners.empty() ? o.planner : o.planners[next++];
    return w2l::make_planner(spec, o.greedy);
  });
  emit(o, [&](std::ostream& out) { w2l::write_sweep_csv(out, axis, rows); });
  return 0;
}

int cmd_heatmap(const Options& o) {
  const w2l::RunConfig cfg = run_config(o);
  const auto planner = w2l::make_planner(o.planner, o.greedy);
  const w2l::HeatmapGrid grid = w2l::heatmap(cfg, *planner, o.runs);
  emit(o, [&](std::ostream& out) { w2l::write_heatmap_csv(out, grid); });
  return 0;
}

int cmd_compare(const Options& o) {
  std::vector<w2l::NamedEnvironment> envs;
  const std::vector<std::string> maps = o.maps.empty() ? std::vector<std::string>{o.map} : o.maps;
  for (const std::string& m : maps) {
    Options per_map = o;
    per_map.map = m;
    envs.push_back({std::filesystem::path(m).stem().string(), run_config(per_map)});
  }
  std::vector<w2l::NamedPlanner> planners;
  const std::vector<std::string> specs =
      o.planners.empty()
          ? std::vector<std::string>{"static:2", "static:3", "threshold:0.1", "threshold:0.2",
                                     "threshold:0.4"}
          : o.planners;
  for (const std::string& spec : specs) {
    // name=spec assigns a display name.
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
    const std::string body = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string group = body.rfind("threshold:", 0) == 0 ? "TP" : "";
    planners.push_back({name, group, w2l::make_planner(body, o.greedy)});
  }
  const auto rows = w2l::compare(envs, planners);
  emit(o, [&](std::ostream& out) {
    w2l::write_compare_csv(out, rows);
    // No CC-POMCP implementation ships with this tool.
    for (const auto& env : envs) out << env.name << ",cc-pomcp,0,absent,,,,,\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"When-to-localize planning in noisy grid worlds"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);
  Options o;

  app.add_option("--map", o.map, "Map file");
  app.add_option("--planner", o.planner,
                 "static:k | threshold:tau | always-move | always-localize | baserl:ckpt | riskrl:ckpt");
  app.add_option("--seed", o.seed, "Campaign seed");
  app.add_option("--episodes", o.episodes, "Episodes per campaign");
  app.add_option("--risk", o.c_hat, "Failure budget c_hat in [0,1]");
  app.add_option("--forward", o.forward, "Transition forward probability");
  app.add_option("--obs-center", o.obs_center, "Sensor kernel center mass");
  app.add_flag("--noisy-localize", o.noisy_localize, "Localize through the sensor kernel");
  app.add_option("--particles", o.particles, "Particle count");
  app.add_option("--cap", o.cap, "Episode step cap (0: 4*(width+height))");
  app.add_flag("--randomize", o.randomize, "Draw start and goal per episode");
  app.add_option("--min-separation", o.min_separation, "Minimum BFS start-goal separation");
  app.add_option("--horizon", o.horizon, "Constraint horizon T");
  app.add_option("--threshold-mode", o.threshold_mode, "complement | paper-verbatim");
  app.add_option("--out", o.out, "Output CSV path (default stdout)");
  app.add_flag("--greedy", o.greedy, "Learned planners take their most likely action");

  CLI::App* train = app.add_subcommand("train", "Train a learned planner");
  train->add_option("--learner", o.learner, "riskrl | baserl");
  train->add_option("--budget", o.budget, "Training episodes");
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint output path");
  train->add_option("--curve", o.curve, "Training curve CSV path");
  train->add_option("--updates-per-episode", o.updates_per_episode, "Gradient steps per episode");
  train->add_option("--estimator", o.estimator, "Dual estimate: outcome | horizon | discounted");
  train->add_option("--batch-episodes", o.batch_episodes, "Episodes per update batch");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate one planner");
  eval->add_option("--trace", o.trace, "Per-decision trace output (JSON lines)");

  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate across noise or risk values");
  sweep->add_option("--axis", o.axis, "transition-noise | observation-noise | risk");
  sweep->add_option("--values", o.values, "Axis values");
  sweep->add_option("--planners", o.planners, "One planner spec per value");

  CLI::App* heat = app.add_subcommand("heatmap", "Localize probability per belief-mean cell");
  heat->add_option("--runs", o.runs, "Episodes to aggregate");

  CLI::App* cmp = app.add_subcommand("compare", "Planners by environments table");
  cmp->add_option("--maps", o.maps, "Map files");
  cmp->add_option("--planners", o.planners, "Planner specs, optionally name=spec");

  for (CLI::App* sub : {train, eval, sweep, heat, cmp}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*sweep) return cmd_sweep(o);
    if (*heat) return cmd_heatmap(o);
    if (*cmp) return cmd_compare(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
