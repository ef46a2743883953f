#include <gtest/gtest.h>

#include <string>

#include "w2l/policy.hpp"

namespace w2l {
namespace {

std::string run(Planner& p, int steps) {
  std::string out;
  PlannerInput in;
  for (int i = 0; i < steps; ++i) {
    const HighLevelAction a = p.decide(in);
    out += a == HighLevelAction::Move ? 'M' : 'L';
    in.prev_action = a;
  }
  return out;
}

PlannerInput with_p(double p_hat) {
  PlannerInput in;
  in.obs.p_hat = p_hat;
  return in;
}

TEST(StaticPlanner, Sequences) {
  StaticPlanner two(2);
  EXPECT_EQ(run(two, 9), "MMLMMLMML");
  StaticPlanner three(3);
  EXPECT_EQ(run(three, 8), "MMMLMMML");
  StaticPlanner one(1);
  EXPECT_EQ(run(one, 6), "MLMLML");
}

TEST(StaticPlanner, ResetRestartsWithMove) {
  StaticPlanner p(3);
  run(p, 2);
  p.reset();
  EXPECT_EQ(run(p, 4), "MMML");
  const auto fresh = p.clone();
  EXPECT_EQ(run(*fresh, 4), "MMML");
}

TEST(StaticPlanner, LocalizeCountIsFloorOfStepsOverPeriod) {
  for (int k = 1; k <= 6; ++k) {
    for (int t = 0; t <= 50; ++t) {
      StaticPlanner p(k);
      const std::string s = run(p, t);
      const auto localizes = std::count(s.begin(), s.end(), 'L');
      EXPECT_EQ(localizes, t / (k + 1)) << "k=" << k << " T=" << t;
    }
  }
}

TEST(StaticPlanner, RejectsZero) {
  EXPECT_THROW(StaticPlanner(0), std::invalid_argument);
  EXPECT_THROW(make_static(-1), std::invalid_argument);
}

TEST(ThresholdPlanner, StrictInequality) {
  ThresholdPlanner p(0.2);
  EXPECT_EQ(p.decide(with_p(0.35)), HighLevelAction::Localize);
  EXPECT_EQ(p.decide(with_p(0.0)), HighLevelAction::Move);
  EXPECT_EQ(p.decide(with_p(0.2)), HighLevelAction::Move);

  ThresholdPlanner zero(0.0);
  EXPECT_EQ(zero.decide(with_p(0.0)), HighLevelAction::Move);
  EXPECT_EQ(zero.decide(with_p(0.01)), HighLevelAction::Localize);

  ThresholdPlanner never(1.0);
  for (double p_hat : {0.0, 0.5, 0.99, 1.0}) {
    EXPECT_EQ(never.decide(with_p(p_hat)), HighLevelAction::Move);
  }
}

TEST(ThresholdPlanner, Memoryless) {
  ThresholdPlanner p(0.4);
  std::string out;
  for (double p_hat : {0.1, 0.5, 0.2}) {
    out += p.decide(with_p(p_hat)) == HighLevelAction::Move ? 'M' : 'L';
  }
  EXPECT_EQ(out, "MLM");
  PlannerInput after_localize = with_p(0.1);
  after_localize.prev_action = HighLevelAction::Localize;
  EXPECT_EQ(p.decide(after_localize), HighLevelAction::Move);
}

TEST(ThresholdPlanner, RejectsOutOfRange) {
  EXPECT_THROW(ThresholdPlanner(-0.1), std::invalid_argument);
  EXPECT_THROW(make_threshold(1.5), std::invalid_argument);
}

TEST(Planners, CommonInterface) {
  std::vector<std::unique_ptr<Planner>> all;
  all.push_back(make_static(2));
  all.push_back(make_threshold(0.3));
  all.push_back(std::make_unique<ConstantPlanner>(HighLevelAction::Localize));
  for (const auto& p : all) {
    EXPECT_FALSE(p->name().empty());
    const auto copy = p->clone();
    EXPECT_EQ(copy->name(), p->name());
  }
}

}  // namespace
}  // namespace w2l
