#include "w2l/harness.hpp"

#include <chrono>
#include <exception>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>

#include "w2l/checkpoint.hpp"
#include "w2l/nav.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace w2l {

// ---------------------------------------------------------------------------
// RunConfig

const GridMap& RunConfig::grid() const {
  if (!map) throw std::invalid_argument("run config has no map loaded");
  return *map;
}

ObservationNoise RunConfig::localize_kernel() const {
  return noiseless_localize ? ObservationNoise::identity() : observation;
}

int RunConfig::cap_for(const GridMap& m) const {
  return episode_cap > 0 ? episode_cap : default_episode_cap(m);
}

void RunConfig::validate() const {
  grid();
  transition.validate();
  observation.validate();
  risk.validate();
  if (episodes < 0) throw std::invalid_argument("episode count must be nonnegative");
  if (particles < 1) throw std::invalid_argument("need at least one particle");
  if (min_separation < 0) throw std::invalid_argument("min separation must be nonnegative");
}

// ---------------------------------------------------------------------------
// Episode loop

namespace {

/// Low-level command for a Move decision, or nothing when the belief mean
/// already sits in the goal region (or is cut off from it).
std::optional<Direction> command_for(Path& path, Cell mean, const GridMap& map,
                                     const DistanceField& to_goal) {
  if (path.size() >= 2 && path.waypoints[1] == mean) path = truncate(std::move(path));
  if (path.size() >= 2) {
    try {
      return next_command(path, mean, map);
    } catch (const UnreachableError&) {
      // Mean drifted into a pocket that cannot reach the next waypoint.
    }
  }
  if (map.is_goal(mean) || !to_goal.reachable(mean)) return std::nullopt;
  path = shortest_path(map, mean, to_goal);
  return next_command(path, mean, map);
}

}  // namespace

EpisodeResult run_episode(const RunConfig& cfg, const GridMap& map, Planner& planner, Rng& rng,
                          bool keep_trace) {
  using Clock = std::chrono::steady_clock;
  const int cap = cfg.cap_for(map);
  const DistanceField to_goal(map, map.goal());
  if (!to_goal.reachable(map.start())) {
    throw UnreachableError("goal unreachable from start " + std::to_string(map.start().row) + "," +
                           std::to_string(map.start().col));
  }
  const ObservationNoise localize_noise = cfg.localize_kernel();

  EpisodeResult result;
  result.start = map.start();
  result.goal = map.goal().front();
  EnvState env = reset_env(map);
  Belief belief = init_belief(map.start(), static_cast<std::size_t>(cfg.particles));
  Path path = shortest_path(map, map.start(), to_goal);
  planner.reset();

  HighLevelAction prev = HighLevelAction::Move;
  PlannerObservation obs = planner_observation(belief, map, to_goal);
  while (env.status == Status::Active) {
    const Cell mean = belief_mean(belief, map);
    const auto t0 = Clock::now();
    const HighLevelAction action = planner.decide({obs, prev});
    result.decide_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    ++result.decisions;

    if (action == HighLevelAction::Move) {
      if (const auto dir = command_for(path, mean, map, to_goal)) {
        path = truncate(std::move(path));
        env = step_move(env, map, *dir, cfg.transition, cap, rng);
        belief = propagate(belief, map, *dir, cfg.transition, rng);
      } else {
        env = step_idle(env, cap);
      }
    } else {
      const Cell observed = observe_pose(env, localize_noise, map, rng);
      belief = update(belief, map, observed, localize_noise, rng);
      env = step_idle(env, cap);
      const Cell replan_from = belief_mean(belief, map);
      path = to_goal.reachable(replan_from) ? shortest_path(map, replan_from, to_goal)
                                            : Path{{replan_from}};
    }

    Transition tr;
    tr.obs = obs;
    tr.prev_action = prev;
    tr.action = action;
    tr.base_reward = cfg.rewards.reward(action, env.status);
    tr.safe_indicator = env.status == Status::Failed ? 0 : 1;
    tr.done = env.status != Status::Active;
    result.record.transitions.push_back(tr);
    if (keep_trace) {
      result.trace.push_back({env.steps_taken, action, env.true_pose, mean, obs.p_hat, obs.d_hat,
                              tr.base_reward});
    }

    prev = action;
    if (env.status == Status::Active) obs = planner_observation(belief, map, to_goal);
  }
  result.record.outcome = env.status;
  result.steps = env.steps_taken;
  return result;
}

MetricsSummary summarize(std::span<const EpisodeResult> results) {
  MetricsSummary s;
  s.n_runs = static_cast<int>(results.size());
  if (results.empty()) return s;
  double successes = 0.0;
  double localizations = 0.0;
  double steps = 0.0;
  double decide = 0.0;
  double decisions = 0.0;
  for (const EpisodeResult& r : results) {
    successes += r.record.succeeded() ? 1.0 : 0.0;
    localizations += r.record.localize_count();
    steps += r.steps;
    decide += r.decide_seconds;
    decisions += r.decisions;
  }
  const double n = static_cast<double>(results.size());
  s.success_rate = successes / n;
  s.failure_rate = 1.0 - s.success_rate;
  s.mean_localizations = localizations / n;
  s.mean_steps = steps / n;
  s.mean_inference_ms = decisions > 0.0 ? 1e3 * decide / decisions : 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Campaigns

namespace {

constexpr std::uint64_t kPlannerSalt = 0x706c616e6e6572ULL;

EpisodeResult campaign_episode(const RunConfig& cfg, const Planner& prototype, int index,
                               bool keep_trace) {
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)));
  const GridMap& base = cfg.grid();
  std::optional<GridMap> randomized;
  if (cfg.randomize) {
    const auto [start, goal] = random_start_goal(base, cfg.min_separation, rng);
    randomized.emplace(base.with_start_goal(start, {goal}));
  }
  std::unique_ptr<Planner> planner = prototype.clone();
  planner->seed(derive_seed(cfg.seed ^ kPlannerSalt, static_cast<std::uint64_t>(index)));
  return run_episode(cfg, randomized ? *randomized : base, *planner, rng, keep_trace);
}

}  // namespace

std::vector<EpisodeResult> run_campaign_serial(const RunConfig& cfg, const Planner& prototype,
                                               bool keep_traces) {
  cfg.validate();
  std::vector<EpisodeResult> results;
  results.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int i = 0; i < cfg.episodes; ++i) {
    results.push_back(campaign_episode(cfg, prototype, i, keep_traces));
  }
  return results;
}

std::vector<EpisodeResult> run_campaign(const RunConfig& cfg, const Planner& prototype,
                                        bool keep_traces) {
  cfg.validate();
  std::vector<EpisodeResult> results(static_cast<std::size_t>(cfg.episodes));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.episodes; ++i) {
    try {
      results[i] = campaign_episode(cfg, prototype, i, keep_traces);
    } catch (...) {
#pragma omp critical(w2l_campaign_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

MetricsSummary evaluate(const RunConfig& cfg, const Planner& prototype) {
  return summarize(run_campaign(cfg, prototype));
}

MetricsSummary evaluate_serial(const RunConfig& cfg, const Planner& prototype) {
  return summarize(run_campaign_serial(cfg, prototype));
}

// ---------------------------------------------------------------------------
// Sweeps

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "transition-noise" || name == "transition") return SweepAxis::TransitionNoise;
  if (name == "observation-noise" || name == "observation") return SweepAxis::ObservationNoise;
  if (name == "risk") return SweepAxis::Risk;
  throw std::invalid_argument("unknown sweep axis " + name);
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::TransitionNoise:
      return "transition-noise";
    case SweepAxis::ObservationNoise:
      return "observation-noise";
    case SweepAxis::Risk:
      return "risk";
  }
  return "?";
}

RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::TransitionNoise:
      cfg.transition = TransitionNoise::with_forward(value);
      break;
    case SweepAxis::ObservationNoise:
      cfg.noiseless_localize = false;
      cfg.observation = ObservationNoise::with_center(value);
      break;
    case SweepAxis::Risk:
      cfg.risk.c_hat = value;
      break;
  }
  return cfg;
}

std::vector<SweepRow> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                            const PlannerForConfig& planner_for) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double v : values) {
    const RunConfig cfg = apply_axis(base, axis, v);
    const std::unique_ptr<Planner> planner = planner_for(cfg);
    rows.push_back({v, evaluate(cfg, *planner)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Heatmaps

double HeatmapGrid::probability(Cell c) const {
  const int v = visits_at(c);
  return v > 0 ? static_cast<double>(localizes_at(c)) / v : -1.0;
}

HeatmapGrid heatmap(const RunConfig& cfg, const Planner& prototype, int runs) {
  if (cfg.randomize) throw std::invalid_argument("heatmaps need a fixed start and goal");
  RunConfig c = cfg;
  c.episodes = runs;
  const auto results = run_campaign(c, prototype, true);
  HeatmapGrid grid;
  grid.width = c.grid().width();
  grid.height = c.grid().height();
  grid.visits.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
  grid.localizes.assign(grid.visits.size(), 0);
  for (const EpisodeResult& r : results) {
    for (const TraceRow& row : r.trace) {
      const int idx = row.belief_mean.row * grid.width + row.belief_mean.col;
      ++grid.visits[idx];
      if (row.action == HighLevelAction::Localize) ++grid.localizes[idx];
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<CompareRow> compare(std::span<const NamedEnvironment> environments,
                                std::span<const NamedPlanner> planners) {
  std::vector<CompareRow> rows;
  for (const NamedEnvironment& env : environments) {
    std::map<std::string, std::vector<MetricsSummary>> groups;
    std::vector<std::string> group_order;
    for (const NamedPlanner& p : planners) {
      const MetricsSummary s = evaluate(env.cfg, *p.prototype);
      rows.push_back({p.name, env.name, s, false});
      if (!p.group.empty()) {
        if (!groups.count(p.group)) group_order.push_back(p.group);
        groups[p.group].push_back(s);
      }
    }
    for (const std::string& g : group_order) {
      const auto& members = groups[g];
      if (members.size() < 2) continue;
      MetricsSummary avg;
      for (const MetricsSummary& m : members) {
        avg.n_runs += m.n_runs;
        avg.success_rate += m.success_rate;
        avg.mean_localizations += m.mean_localizations;
        avg.mean_steps += m.mean_steps;
        avg.mean_inference_ms += m.mean_inference_ms;
      }
      const double k = static_cast<double>(members.size());
      avg.success_rate /= k;
      avg.failure_rate = 1.0 - avg.success_rate;
      avg.mean_localizations /= k;
      avg.mean_steps /= k;
      avg.mean_inference_ms /= k;
      rows.push_back({g, env.name, avg, true});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Planner specs

std::unique_ptr<Planner> make_planner(const std::string& spec, bool greedy) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "static") return make_static(std::stoi(arg));
  if (kind == "threshold") return make_threshold(std::stod(arg));
  if (kind == "always-move") return std::make_unique<ConstantPlanner>(HighLevelAction::Move);
  if (kind == "always-localize") return std::make_unique<ConstantPlanner>(HighLevelAction::Localize);
  if (kind == "riskrl" || kind == "baserl") {
    if (arg.empty()) throw std::invalid_argument(kind + " planner needs a checkpoint path");
    const nn::Checkpoint ckpt = nn::load_checkpoint(arg);
    const SacHyper hyper = SacHyper::from_json(ckpt.metadata.at("sac_hyper"));
    auto actor = std::make_shared<const nn::ParameterStore>(ckpt.stores.at("actor"));
    return std::make_unique<RecurrentPolicyPlanner>(
        std::move(actor), hyper, greedy ? SelectMode::Greedy : SelectMode::Sample, kind);
  }
  throw std::invalid_argument("unknown planner spec " + spec);
}

// ---------------------------------------------------------------------------
// Output

namespace {

void write_summary_fields(std::ostream& out, const MetricsSummary& s) {
  out << s.n_runs << ',' << s.success_rate << ',' << s.failure_rate << ',' << s.mean_localizations
      << ',' << s.mean_steps << ',' << s.mean_inference_ms;
}

constexpr const char* kSummaryHeader =
    "n_runs,success_rate,failure_rate,mean_localizations,mean_steps,mean_inference_ms";

}  // namespace

void write_summary_csv(std::ostream& out,
                       std::span<const std::pair<std::string, MetricsSummary>> rows) {
  out << "planner," << kSummaryHeader << '\n';
  for (const auto& [name, s] : rows) {
    out << name << ',';
    write_summary_fields(out, s);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows) {
  out << "axis,value," << kSummaryHeader << '\n';
  for (const SweepRow& r : rows) {
    out << to_string(axis) << ',' << r.value << ',';
    write_summary_fields(out, r.summary);
    out << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid) {
  out << "row,col,visits,localizes,localize_probability\n";
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      const Cell cell{r, c};
      if (grid.visits_at(cell) == 0) continue;
      out << r << ',' << c << ',' << grid.visits_at(cell) << ',' << grid.localizes_at(cell) << ','
          << grid.probability(cell) << '\n';
    }
  }
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows) {
  out << "environment,planner,aggregate," << kSummaryHeader << '\n';
  for (const CompareRow& r : rows) {
    out << r.environment << ',' << r.planner << ',' << (r.aggregate ? 1 : 0) << ',';
    write_summary_fields(out, r.summary);
    out << '\n';
  }
}

void write_trace(std::ostream& out, int episode, const EpisodeResult& result) {
  for (const TraceRow& row : result.trace) {
    const nlohmann::json j = {{"episode", episode},
                              {"step", row.step},
                              {"action", to_string(row.action)},
                              {"true_pose", {row.true_pose.row, row.true_pose.col}},
                              {"belief_mean", {row.belief_mean.row, row.belief_mean.col}},
                              {"p_hat", row.p_hat},
                              {"d_hat", row.d_hat},
                              {"reward", row.reward}};
    out << j.dump() << '\n';
  }
}

}  // namespace w2l
