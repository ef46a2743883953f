#ifndef W2L_RISK_HPP
#define W2L_RISK_HPP

#include <string>

#include "w2l/episode.hpp"

namespace w2l {

/// How the user-facing failure budget c_hat becomes the cumulative threshold c.
enum class ThresholdMode {
  /// c = (1 - c_hat) * (1 - gamma^(T+1)) / (1 - gamma): discounted survival
  /// must average at least 1 - c_hat over the horizon.
  Complement,
  /// c = (1 - c_hat * gamma^T * (1 - gamma)) / (1 - gamma), kept for comparison.
  PaperVerbatim,
};

ThresholdMode parse_threshold_mode(const std::string& name);
const char* to_string(ThresholdMode mode);

struct RiskConfig {
  double c_hat = 0.4;
  double gamma = 0.9;
  int horizon_T = 200;
  double lambda_lr = 0.01;
  ThresholdMode mode = ThresholdMode::Complement;

  void validate() const;
};

struct DualState {
  double lambda = 1.0;
  double threshold_c = 0.0;
};

double compute_threshold(const RiskConfig& cfg);

/// r + lambda * (safe - c * (1 - gamma)).
double shaped_reward(const Transition& t, double lambda, const RiskConfig& cfg);
double shaped_reward(const Transition& t, double lambda, double threshold_c, double gamma);

/// Sum over the recorded steps of gamma^t * safe_t.
double constraint_estimate(const EpisodeRecord& ep, const RiskConfig& cfg);

/// Same sum run out to the horizon T, holding the terminal state: steps after
/// reaching the goal count as safe, steps after a failure as unsafe.
double constraint_estimate_to_horizon(const EpisodeRecord& ep, const RiskConfig& cfg);

/// Chance-constraint form: the full horizon sum of gamma^t when the episode
/// did not fail, zero when it did. Its expectation is P(no failure) times the
/// safe-horizon sum, so comparing it with c bounds the failure probability by
/// c_hat in complement mode.
double constraint_estimate_outcome(const EpisodeRecord& ep, const RiskConfig& cfg);

enum class ConstraintEstimator { Outcome, Horizon, Discounted };

ConstraintEstimator parse_constraint_estimator(const std::string& name);
const char* to_string(ConstraintEstimator e);
double constraint_estimate(const EpisodeRecord& ep, const RiskConfig& cfg, ConstraintEstimator e);

/// Projected dual descent: lambda <- max(0, lambda - lr * (U - c)).
DualState dual_update(const DualState& d, double u_estimate, const RiskConfig& cfg);

/// Shaped rewards and terminal bootstrap values for the critic.
class RewardShaper {
 public:
  /// `absorbing_terminals`: a terminal step is followed by an endless run of
  /// its own indicator (1 at the goal, 0 after a failure) instead of nothing.
  RewardShaper(const RiskConfig& cfg, bool absorbing_terminals);

  double reward(const Transition& t, double lambda) const;
  /// Value of the states after a terminal transition, already discounted by
  /// one step. Zero without absorbing terminals or with lambda = 0.
  double terminal_value(const Transition& t, double lambda) const;

  double threshold() const { return c_; }
  const RiskConfig& config() const { return cfg_; }

 private:
  RiskConfig cfg_;
  double c_;
  bool absorbing_;
};

}  // namespace w2l

#endif  // W2L_RISK_HPP
