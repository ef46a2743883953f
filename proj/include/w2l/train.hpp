#ifndef W2L_TRAIN_HPP
#define W2L_TRAIN_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "w2l/checkpoint.hpp"
#include "w2l/harness.hpp"
#include "w2l/rsac.hpp"

namespace w2l {

enum class LearnerKind {
  RiskAware,    // constrained, shaped reward with a learned multiplier
  RiskUnaware,  // failure penalty in the reward, multiplier pinned at zero
};

LearnerKind parse_learner_kind(const std::string& name);
const char* to_string(LearnerKind kind);

struct TrainConfig {
  RunConfig run;  // map, noise, risk settings and seed for rollouts
  LearnerKind kind = LearnerKind::RiskAware;
  SacHyper hyper = SacHyper::risk_aware();
  int budget = 200;  // training episodes
  int dual_window = 10;
  double lambda_init = 1.0;
  bool absorbing_terminals = true;
  ConstraintEstimator estimator = ConstraintEstimator::Outcome;

  /// Risk-aware or risk-unaware defaults for everything but `run`.
  static TrainConfig defaults(LearnerKind kind, RunConfig run);
  void validate() const;
};

struct CurveRow {
  int episode = 0;
  bool success = false;
  int n_localize = 0;
  int steps = 0;
  double lambda = 0.0;
  double u_estimate = 0.0;
  double u_running = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

/// Produces one training episode with the given (sampling) planner.
using EpisodeSource = std::function<EpisodeRecord(Planner& planner, Rng& rng, int episode)>;

/// Rollouts on cfg.run: fixed start/goal, or fresh ones per episode when randomized.
EpisodeSource grid_episode_source(const TrainConfig& cfg);

struct TrainResult {
  SacAgent agent;
  double lambda = 0.0;
  std::vector<CurveRow> curve;
};

using CurveCallback = std::function<void(const CurveRow&)>;

/// Runs cfg.budget episodes of rollout, critic/actor updates and dual ascent.
TrainResult train(const TrainConfig& cfg, const EpisodeSource& source,
                  const CurveCallback& on_episode = {});
TrainResult train(const TrainConfig& cfg, const CurveCallback& on_episode = {});

/// Checkpoint holding the agent, the multiplier and the training settings.
nn::Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result);

/// Greedy planner over a freshly trained actor.
std::unique_ptr<Planner> planner_from(const TrainResult& result, LearnerKind kind,
                                      SelectMode mode = SelectMode::Greedy);

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);

}  // namespace w2l

#endif  // W2L_TRAIN_HPP
