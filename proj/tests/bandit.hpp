#ifndef W2L_TESTS_BANDIT_HPP
#define W2L_TESTS_BANDIT_HPP

// Single-decision constrained bandit: Move fails with probability 1/2 and
// costs nothing, Localize always succeeds and costs 1.
//
// With horizon T = 0 the complement threshold is c = 1 - c_hat, and the
// outcome estimate makes the constraint P(success) >= 1 - c_hat, i.e.
// P(Move) <= 2 c_hat. Enumerating mixtures q = P(Localize): the expected
// reward -q is maximized at the smallest feasible q = max(0, 1 - 2 c_hat).

#include <algorithm>

#include "w2l/train.hpp"

namespace w2l::bandit {

inline EpisodeRecord play(Planner& planner, Rng& rng) {
  planner.reset();
  PlannerInput in;
  in.obs.p_hat = 0.0;
  in.obs.d_hat = 1;
  Transition t;
  t.obs = in.obs;
  t.prev_action = in.prev_action;
  t.action = planner.decide(in);
  t.done = true;
  EpisodeRecord ep;
  if (t.action == HighLevelAction::Localize) {
    t.base_reward = -1.0;
    ep.outcome = Status::ReachedGoal;
  } else if (uniform01(rng) < 0.5) {
    ep.outcome = Status::Failed;
    t.safe_indicator = 0;
  } else {
    ep.outcome = Status::ReachedGoal;
  }
  ep.transitions.push_back(t);
  return ep;
}

inline EpisodeSource source() {
  return [](Planner& planner, Rng& rng, int) { return play(planner, rng); };
}

/// Oracle: the constrained optimum's localize probability by enumeration
/// over a fine grid of mixtures.
inline double optimal_localize_probability(double c_hat) {
  double best_q = 1.0;
  double best_reward = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double q = i / 10000.0;
    const double success = q + 0.5 * (1.0 - q);
    if (success < 1.0 - c_hat - 1e-12) continue;
    if (-q > best_reward) {
      best_reward = -q;
      best_q = q;
    }
  }
  return best_q;
}

inline TrainConfig config(double c_hat, std::uint64_t seed, int budget) {
  RunConfig run;
  run.seed = seed;
  run.risk.c_hat = c_hat;
  run.risk.horizon_T = 0;
  TrainConfig cfg;
  cfg.run = run;
  cfg.budget = budget;
  cfg.absorbing_terminals = false;
  return cfg;
}

/// Localize probability of a trained actor at the bandit's single decision.
inline double localize_probability(const TrainResult& result) {
  PlannerInput in;
  in.obs.p_hat = 0.0;
  in.obs.d_hat = 1;
  const auto logits = actor_logits(result.agent.actor(), result.agent.hyper(),
                                   nn::LstmState::zeros(1, result.agent.hyper().lstm_hidden), in,
                                   nullptr);
  Rng unused(0);
  return choose_from_logits(logits, SelectMode::Greedy, unused).probs[1];
}

}  // namespace w2l::bandit

#endif  // W2L_TESTS_BANDIT_HPP
