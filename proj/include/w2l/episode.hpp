#ifndef W2L_EPISODE_HPP
#define W2L_EPISODE_HPP

#include <vector>

#include "w2l/policy.hpp"

namespace w2l {

/// One high-level decision as seen by the learner.
struct Transition {
  PlannerObservation obs;  // what the planner saw when deciding
  HighLevelAction prev_action = HighLevelAction::Move;
  HighLevelAction action = HighLevelAction::Move;
  double base_reward = 0.0;
  int safe_indicator = 1;  // 0 iff this step ended in failure
  bool done = false;
};

struct EpisodeRecord {
  std::vector<Transition> transitions;
  Status outcome = Status::Active;

  int localize_count() const;
  bool succeeded() const { return outcome == Status::ReachedGoal; }
};

/// Per-outcome rewards before any constraint shaping.
struct RewardWeights {
  double goal = 0.0;
  double move = 0.0;
  double localize = -1.0;
  double fail = 0.0;

  /// Risk-aware learner: only localizing costs.
  static RewardWeights risk_aware() { return {}; }
  /// Risk-unaware baseline: localizing costs 1, failing costs 256.
  static RewardWeights risk_unaware() { return {0.0, 0.0, -1.0, -256.0}; }

  double reward(HighLevelAction action, Status after) const;
};

}  // namespace w2l

#endif  // W2L_EPISODE_HPP
