#include "w2l/episode.hpp"

namespace w2l {

int EpisodeRecord::localize_count() const {
  int n = 0;
  for (const Transition& t : transitions) n += t.action == HighLevelAction::Localize ? 1 : 0;
  return n;
}

double RewardWeights::reward(HighLevelAction action, Status after) const {
  double r = action == HighLevelAction::Localize ? localize : move;
  if (after == Status::Failed) r += fail;
  if (after == Status::ReachedGoal) r += goal;
  return r;
}

}  // namespace w2l
