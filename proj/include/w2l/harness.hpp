#ifndef W2L_HARNESS_HPP
#define W2L_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "w2l/belief.hpp"
#include "w2l/episode.hpp"
#include "w2l/gridworld.hpp"
#include "w2l/policy.hpp"
#include "w2l/risk.hpp"
#include "w2l/rsac.hpp"

namespace w2l {

struct RunConfig {
  std::string map_path;
  std::shared_ptr<const GridMap> map;
  std::string planner = "threshold:0.2";
  TransitionNoise transition;
  ObservationNoise observation;  // sensor kernel
  bool noiseless_localize = true;
  RiskConfig risk;
  RewardWeights rewards;
  int episodes = 100;
  std::uint64_t seed = 1;
  bool randomize = false;
  int min_separation = 50;
  int particles = 100;
  int episode_cap = 0;  // 0 selects 4 * (width + height)

  const GridMap& grid() const;
  ObservationNoise localize_kernel() const;
  int cap_for(const GridMap& map) const;
  void validate() const;
};

struct TraceRow {
  int step = 0;
  HighLevelAction action = HighLevelAction::Move;
  Cell true_pose;
  Cell belief_mean;
  double p_hat = 0.0;
  int d_hat = 0;
  double reward = 0.0;
};

struct EpisodeResult {
  EpisodeRecord record;
  std::vector<TraceRow> trace;
  Cell start;
  Cell goal;
  int steps = 0;
  int decisions = 0;
  double decide_seconds = 0.0;
};

/// Runs one move/localize episode on `map` (start and goal taken from the map).
/// Throws UnreachableError when the goal cannot be reached from the start.
EpisodeResult run_episode(const RunConfig& cfg, const GridMap& map, Planner& planner, Rng& rng,
                          bool keep_trace = false);

struct MetricsSummary {
  int n_runs = 0;
  double success_rate = 0.0;
  double failure_rate = 0.0;
  double mean_localizations = 0.0;
  double mean_steps = 0.0;
  double mean_inference_ms = 0.0;
};

MetricsSummary summarize(std::span<const EpisodeResult> results);

/// All episodes of a campaign. Episode i draws its start/goal (when
/// randomized) and its noise from a stream seeded by (cfg.seed, i), so the
/// parallel and serial runs produce identical episodes.
std::vector<EpisodeResult> run_campaign(const RunConfig& cfg, const Planner& prototype,
                                        bool keep_traces = false);
std::vector<EpisodeResult> run_campaign_serial(const RunConfig& cfg, const Planner& prototype,
                                               bool keep_traces = false);

MetricsSummary evaluate(const RunConfig& cfg, const Planner& prototype);
MetricsSummary evaluate_serial(const RunConfig& cfg, const Planner& prototype);

enum class SweepAxis { TransitionNoise, ObservationNoise, Risk };

SweepAxis parse_sweep_axis(const std::string& name);
const char* to_string(SweepAxis axis);
RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  MetricsSummary summary;
};

using PlannerForConfig = std::function<std::unique_ptr<Planner>(const RunConfig&)>;

/// One campaign per value. Seeds are shared across values so rows are paired.
std::vector<SweepRow> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                            const PlannerForConfig& planner_for);

/// Per belief-mean cell decision and localize counts.
struct HeatmapGrid {
  int width = 0;
  int height = 0;
  std::vector<int> visits;
  std::vector<int> localizes;

  int visits_at(Cell c) const { return visits[c.row * width + c.col]; }
  int localizes_at(Cell c) const { return localizes[c.row * width + c.col]; }
  /// Localize probability, or a negative value for unvisited cells.
  double probability(Cell c) const;
};

HeatmapGrid heatmap(const RunConfig& cfg, const Planner& prototype, int runs);

struct NamedPlanner {
  std::string name;
  std::string group;  // rows sharing a group are also reported averaged
  std::shared_ptr<const Planner> prototype;
};

struct NamedEnvironment {
  std::string name;
  RunConfig cfg;
};

struct CompareRow {
  std::string planner;
  std::string environment;
  MetricsSummary summary;
  bool aggregate = false;
};

std::vector<CompareRow> compare(std::span<const NamedEnvironment> environments,
                                std::span<const NamedPlanner> planners);

/// Builds a planner from `static:k`, `threshold:tau`, `always-move`,
/// `always-localize`, `baserl:<ckpt>` or `riskrl:<ckpt>`. Learned planners
/// sample from their policy unless `greedy` is set.
std::unique_ptr<Planner> make_planner(const std::string& spec, bool greedy = false);

// CSV and trace output.
void write_summary_csv(std::ostream& out, std::span<const std::pair<std::string, MetricsSummary>> rows);
void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows);
void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid);
void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);
/// One JSON object per decision.
void write_trace(std::ostream& out, int episode, const EpisodeResult& result);

}  // namespace w2l

#endif  // W2L_HARNESS_HPP
