#include <gtest/gtest.h>

#include <sstream>

#include "bandit.hpp"
#include "w2l/train.hpp"

namespace w2l {
namespace {

RunConfig tunnel_run(std::uint64_t seed) {
  RunConfig run;
  run.map_path = W2L_MAP_DIR "/tunnel12.map";
  run.map = std::make_shared<const GridMap>(load_map_file(run.map_path));
  run.seed = seed;
  return run;
}

TEST(BanditOracle, EnumeratedOptimum) {
  EXPECT_NEAR(bandit::optimal_localize_probability(0.2), 0.6, 1e-9);
  EXPECT_NEAR(bandit::optimal_localize_probability(0.4), 0.2, 1e-9);
  EXPECT_EQ(bandit::optimal_localize_probability(1.0), 0.0);
}

TEST(Train, BudgetZeroReturnsInitialization) {
  const TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskAware, tunnel_run(3));
  TrainConfig zero = cfg;
  zero.budget = 0;
  const TrainResult result = train(zero);
  EXPECT_TRUE(result.curve.empty());
  EXPECT_EQ(result.lambda, zero.lambda_init);
  const SacAgent fresh(cfg.hyper, derive_seed(cfg.run.seed, 0));
  EpisodeRecord ep;
  ep.transitions.emplace_back();
  EXPECT_EQ(result.agent.actor_log_probs(ep), fresh.actor_log_probs(ep));
}

TEST(Train, MultiplierStaysNonnegativeAndRunIsReproducible) {
  TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskAware, tunnel_run(4));
  cfg.budget = 30;
  cfg.hyper.updates_per_episode = 1;
  cfg.run.risk.lambda_lr = 0.2;
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);
  ASSERT_EQ(a.curve.size(), 30u);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_GE(a.curve[i].lambda, 0.0);
    EXPECT_EQ(a.curve[i].lambda, b.curve[i].lambda);
    EXPECT_EQ(a.curve[i].success, b.curve[i].success);
    EXPECT_EQ(a.curve[i].n_localize, b.curve[i].n_localize);
    EXPECT_TRUE(std::isfinite(a.curve[i].actor_loss));
    EXPECT_TRUE(std::isfinite(a.curve[i].critic_loss));
  }
}

TEST(Train, RiskUnawareKeepsMultiplierAtZero) {
  TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskUnaware, tunnel_run(5));
  cfg.budget = 12;
  cfg.hyper.updates_per_episode = 1;
  EXPECT_EQ(cfg.run.rewards.fail, -256.0);
  EXPECT_EQ(cfg.hyper.gamma, 0.95);
  const TrainResult r = train(cfg);
  for (const CurveRow& row : r.curve) EXPECT_EQ(row.lambda, 0.0);
}

TEST(Train, CurveCsvColumns) {
  TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskAware, tunnel_run(6));
  cfg.budget = 3;
  int calls = 0;
  const TrainResult r = train(cfg, [&](const CurveRow&) { ++calls; });
  EXPECT_EQ(calls, 3);
  std::ostringstream out;
  write_curve_csv(out, r.curve);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("episode,success,n_localize,lambda,U_estimate,actor_loss,critic_loss", 0), 0u);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST(Train, CheckpointCarriesSettings) {
  TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskAware, tunnel_run(7));
  cfg.budget = 2;
  const TrainResult r = train(cfg);
  const nn::Checkpoint ckpt = make_checkpoint(cfg, r);
  EXPECT_EQ(ckpt.metadata.at("learner"), "riskrl");
  EXPECT_EQ(ckpt.metadata.at("c_hat"), cfg.run.risk.c_hat);
  EXPECT_EQ(ckpt.metadata.at("estimator"), "outcome");
  EXPECT_EQ(ckpt.stores.count("actor"), 1u);
}

TEST(Train, UnconstrainedBanditRarelyLocalizes) {
  // With c_hat = 1 the constraint is slack; the entropy temperature alone
  // sets the localize probability to sigmoid(-1 / alpha).
  TrainConfig cfg = bandit::config(1.0, 1, 1500);
  cfg.hyper.alpha = 0.25;
  const TrainResult r = train(cfg, bandit::source());
  EXPECT_LT(bandit::localize_probability(r), 0.1);
  EXPECT_LT(r.lambda, 0.05);
}

TEST(Train, Errors) {
  TrainConfig cfg = TrainConfig::defaults(LearnerKind::RiskAware, tunnel_run(1));
  cfg.budget = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(parse_learner_kind("dqn"), std::invalid_argument);
  EXPECT_EQ(parse_learner_kind("baserl"), LearnerKind::RiskUnaware);
}

}  // namespace
}  // namespace w2l
