#include "w2l/policy.hpp"

#include <sstream>
#include <stdexcept>

namespace w2l {

const char* to_string(HighLevelAction a) {
  return a == HighLevelAction::Move ? "move" : "localize";
}

StaticPlanner::StaticPlanner(int moves_per_localize) : k_(moves_per_localize) {
  if (k_ < 1) throw std::invalid_argument("static planner needs at least one move per cycle");
}

HighLevelAction StaticPlanner::decide(const PlannerInput&) {
  if (moves_since_localize_ >= k_) {
    moves_since_localize_ = 0;
    return HighLevelAction::Localize;
  }
  ++moves_since_localize_;
  return HighLevelAction::Move;
}

std::unique_ptr<Planner> StaticPlanner::clone() const {
  return std::make_unique<StaticPlanner>(k_);
}

std::string StaticPlanner::name() const { return "static:" + std::to_string(k_); }

ThresholdPlanner::ThresholdPlanner(double tau) : tau_(tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
}

HighLevelAction ThresholdPlanner::decide(const PlannerInput& input) {
  return input.obs.p_hat > tau_ ? HighLevelAction::Localize : HighLevelAction::Move;
}

std::unique_ptr<Planner> ThresholdPlanner::clone() const {
  return std::make_unique<ThresholdPlanner>(tau_);
}

std::string ThresholdPlanner::name() const {
  std::ostringstream out;
  out << "threshold:" << tau_;
  return out.str();
}

std::unique_ptr<Planner> ConstantPlanner::clone() const {
  return std::make_unique<ConstantPlanner>(action_);
}

std::string ConstantPlanner::name() const {
  return action_ == HighLevelAction::Move ? "always-move" : "always-localize";
}

std::unique_ptr<Planner> make_static(int k) { return std::make_unique<StaticPlanner>(k); }

std::unique_ptr<Planner> make_threshold(double tau) {
  return std::make_unique<ThresholdPlanner>(tau);
}

}  // namespace w2l
