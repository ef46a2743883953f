#include "w2l/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace w2l {

ThresholdMode parse_threshold_mode(const std::string& name) {
  if (name == "complement") return ThresholdMode::Complement;
  if (name == "paper-verbatim" || name == "verbatim") return ThresholdMode::PaperVerbatim;
  throw std::invalid_argument("unknown threshold mode " + name);
}

const char* to_string(ThresholdMode mode) {
  return mode == ThresholdMode::Complement ? "complement" : "paper-verbatim";
}

void RiskConfig::validate() const {
  if (!(c_hat >= 0.0 && c_hat <= 1.0)) throw std::invalid_argument("c_hat must lie in [0,1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (horizon_T < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (!(lambda_lr > 0.0)) throw std::invalid_argument("dual step size must be positive");
}

double compute_threshold(const RiskConfig& cfg) {
  const double g = cfg.gamma;
  const double T = static_cast<double>(cfg.horizon_T);
  if (cfg.mode == ThresholdMode::PaperVerbatim) {
    return (1.0 - cfg.c_hat * std::pow(g, T) * (1.0 - g)) / (1.0 - g);
  }
  return (1.0 - cfg.c_hat) * (1.0 - std::pow(g, T + 1.0)) / (1.0 - g);
}

double shaped_reward(const Transition& t, double lambda, double threshold_c, double gamma) {
  return t.base_reward + lambda * (static_cast<double>(t.safe_indicator) - threshold_c * (1.0 - gamma));
}

double shaped_reward(const Transition& t, double lambda, const RiskConfig& cfg) {
  return shaped_reward(t, lambda, compute_threshold(cfg), cfg.gamma);
}

double constraint_estimate(const EpisodeRecord& ep, const RiskConfig& cfg) {
  double u = 0.0;
  double discount = 1.0;
  for (const Transition& t : ep.transitions) {
    u += discount * t.safe_indicator;
    discount *= cfg.gamma;
  }
  return u;
}

double constraint_estimate_to_horizon(const EpisodeRecord& ep, const RiskConfig& cfg) {
  double u = 0.0;
  double discount = 1.0;
  int last = 1;
  const int n = static_cast<int>(ep.transitions.size());
  for (int k = 0; k <= cfg.horizon_T; ++k) {
    const int s = k < n ? ep.transitions[k].safe_indicator : last;
    if (k < n) last = s;
    u += discount * s;
    discount *= cfg.gamma;
  }
  return u;
}

double constraint_estimate_outcome(const EpisodeRecord& ep, const RiskConfig& cfg) {
  if (ep.outcome == Status::Failed) return 0.0;
  return (1.0 - std::pow(cfg.gamma, cfg.horizon_T + 1.0)) / (1.0 - cfg.gamma);
}

ConstraintEstimator parse_constraint_estimator(const std::string& name) {
  if (name == "outcome") return ConstraintEstimator::Outcome;
  if (name == "horizon") return ConstraintEstimator::Horizon;
  if (name == "discounted") return ConstraintEstimator::Discounted;
  throw std::invalid_argument("unknown constraint estimator " + name);
}

const char* to_string(ConstraintEstimator e) {
  switch (e) {
    case ConstraintEstimator::Outcome:
      return "outcome";
    case ConstraintEstimator::Horizon:
      return "horizon";
    case ConstraintEstimator::Discounted:
      return "discounted";
  }
  return "?";
}

double constraint_estimate(const EpisodeRecord& ep, const RiskConfig& cfg, ConstraintEstimator e) {
  switch (e) {
    case ConstraintEstimator::Outcome:
      return constraint_estimate_outcome(ep, cfg);
    case ConstraintEstimator::Horizon:
      return constraint_estimate_to_horizon(ep, cfg);
    case ConstraintEstimator::Discounted:
      return constraint_estimate(ep, cfg);
  }
  return 0.0;
}

DualState dual_update(const DualState& d, double u_estimate, const RiskConfig& cfg) {
  DualState next = d;
  next.lambda = std::max(0.0, d.lambda - cfg.lambda_lr * (u_estimate - d.threshold_c));
  return next;
}

RewardShaper::RewardShaper(const RiskConfig& cfg, bool absorbing_terminals)
    : cfg_(cfg), c_(compute_threshold(cfg)), absorbing_(absorbing_terminals) {}

double RewardShaper::reward(const Transition& t, double lambda) const {
  return shaped_reward(t, lambda, c_, cfg_.gamma);
}

double RewardShaper::terminal_value(const Transition& t, double lambda) const {
  if (!absorbing_ || !t.done || lambda == 0.0) return 0.0;
  const double g = cfg_.gamma;
  const double per_step = lambda * (static_cast<double>(t.safe_indicator) - c_ * (1.0 - g));
  return g * per_step / (1.0 - g);
}

}  // namespace w2l
