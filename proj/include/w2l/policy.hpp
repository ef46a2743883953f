#ifndef W2L_POLICY_HPP
#define W2L_POLICY_HPP

#include <cstdint>
#include <memory>
#include <string>

#include "w2l/belief.hpp"

namespace w2l {

enum class HighLevelAction : std::uint8_t { Move = 0, Localize = 1 };

const char* to_string(HighLevelAction a);

struct PlannerInput {
  PlannerObservation obs;
  HighLevelAction prev_action = HighLevelAction::Move;
};

/// High-level planner: picks move or localize at every decision step.
/// Instances are owned by one episode at a time; clone() hands out fresh ones.
class Planner {
 public:
  virtual ~Planner() = default;

  virtual HighLevelAction decide(const PlannerInput& input) = 0;
  /// Called at the start of every episode.
  virtual void reset() {}
  /// Reseeds any internal randomness; deterministic planners ignore it.
  virtual void seed(std::uint64_t) {}
  virtual std::unique_ptr<Planner> clone() const = 0;
  virtual std::string name() const = 0;
};

/// k moves, then one localize, repeated.
class StaticPlanner final : public Planner {
 public:
  explicit StaticPlanner(int moves_per_localize);

  HighLevelAction decide(const PlannerInput& input) override;
  void reset() override { moves_since_localize_ = 0; }
  std::unique_ptr<Planner> clone() const override;
  std::string name() const override;

 private:
  int k_;
  int moves_since_localize_ = 0;
};

/// Localizes whenever the collided fraction exceeds tau (strictly).
class ThresholdPlanner final : public Planner {
 public:
  explicit ThresholdPlanner(double tau);

  HighLevelAction decide(const PlannerInput& input) override;
  std::unique_ptr<Planner> clone() const override;
  std::string name() const override;

 private:
  double tau_;
};

/// Emits the same action every step. Used by tests and as a degenerate baseline.
class ConstantPlanner final : public Planner {
 public:
  explicit ConstantPlanner(HighLevelAction action) : action_(action) {}

  HighLevelAction decide(const PlannerInput&) override { return action_; }
  std::unique_ptr<Planner> clone() const override;
  std::string name() const override;

 private:
  HighLevelAction action_;
};

std::unique_ptr<Planner> make_static(int k);
std::unique_ptr<Planner> make_threshold(double tau);

}  // namespace w2l

#endif  // W2L_POLICY_HPP
