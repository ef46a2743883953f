#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "w2l/belief.hpp"
#include "w2l/nav.hpp"

namespace w2l {
namespace {

Belief spread(const std::vector<Cell>& cells, std::size_t per_cell) {
  Belief b;
  for (const Cell& c : cells) {
    for (std::size_t i = 0; i < per_cell; ++i) b.particles.push_back({c, false});
  }
  return b;
}

std::size_t count_at(const Belief& b, Cell c) {
  std::size_t n = 0;
  for (const Particle& p : b.particles) n += p.pose == c ? 1 : 0;
  return n;
}

TEST(InitBelief, AllAtStart) {
  const Belief b = init_belief({1, 1}, 100);
  EXPECT_EQ(b.size(), 100u);
  EXPECT_EQ(count_at(b, {1, 1}), 100u);
  EXPECT_EQ(b.collided_count(), 0u);
  EXPECT_EQ(init_belief({1, 1}, 1).size(), 1u);
  EXPECT_THROW(init_belief({1, 1}, 0), std::invalid_argument);

  const GridMap map = oracle::open_map(6, 6);
  const PlannerObservation obs = planner_observation(init_belief(map.start(), 100), map);
  EXPECT_EQ(obs.p_hat, 0.0);
  EXPECT_EQ(obs.d_hat, oracle::flood_distance(map, map.start()));
}

TEST(Propagate, NoiselessMovesEveryParticle) {
  const GridMap map = oracle::open_map(5, 5);
  Rng rng(1);
  const Belief b = propagate(init_belief({2, 2}, 100), map, Direction::East, {1.0, 0.0, 0.0}, rng);
  EXPECT_EQ(count_at(b, {2, 3}), 100u);
  EXPECT_EQ(planner_observation(b, map).p_hat, 0.0);
}

TEST(Propagate, WallCollidesEveryParticle) {
  const GridMap map = load_map("S.#..\n.....\n....G\n");
  Rng rng(1);
  const Belief b = propagate(init_belief({0, 1}, 100), map, Direction::East, {1.0, 0.0, 0.0}, rng);
  EXPECT_EQ(b.collided_count(), 100u);
  EXPECT_EQ(count_at(b, {0, 1}), 100u);
  EXPECT_EQ(planner_observation(b, map).p_hat, 1.0);

  // Collided particles stay put on the next propagate.
  const Belief again = propagate(b, map, Direction::South, {1.0, 0.0, 0.0}, rng);
  EXPECT_EQ(count_at(again, {0, 1}), 100u);
}

TEST(Propagate, DriftStatisticsMatchMotionModel) {
  const GridMap map = oracle::open_map(5, 5);
  Rng rng(4);
  const Belief b = propagate(init_belief({2, 2}, 10000), map, Direction::East, {}, rng);
  EXPECT_NEAR(count_at(b, {2, 3}) / 10000.0, 0.8, 0.02);
  EXPECT_NEAR(count_at(b, {1, 2}) / 10000.0, 0.1, 0.02);
  EXPECT_NEAR(count_at(b, {3, 2}) / 10000.0, 0.1, 0.02);
}

TEST(Propagate, SameSeedSameBelief) {
  const GridMap map = oracle::open_map(8, 8);
  Rng a(99);
  Rng b(99);
  Belief x = init_belief({4, 4}, 200);
  Belief y = x;
  for (Direction d : {Direction::North, Direction::East, Direction::East, Direction::South}) {
    x = propagate(x, map, d, {}, a);
    y = propagate(y, map, d, {}, b);
  }
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x.particles[i].pose, y.particles[i].pose);
    EXPECT_EQ(x.particles[i].collided, y.particles[i].collided);
  }
}

TEST(Update, NoiselessKernelKeepsMatchingParticles) {
  const GridMap map = oracle::open_map(6, 6);
  Rng rng(3);
  const Belief b = spread({{1, 1}, {2, 2}, {3, 3}, {4, 4}, {3, 4}}, 20);
  const Belief post = update(b, map, {3, 3}, ObservationNoise::identity(), rng);
  EXPECT_EQ(post.size(), 100u);
  EXPECT_EQ(count_at(post, {3, 3}), 100u);
  EXPECT_EQ(post.collided_count(), 0u);
}

TEST(Update, DepletionCollapsesOntoObservation) {
  const GridMap map = oracle::open_map(6, 6);
  Rng rng(3);
  Belief b = init_belief({1, 1}, 50);
  for (Particle& p : b.particles) p.collided = true;
  const Belief post = update(b, map, {2, 2}, ObservationNoise{}, rng);
  EXPECT_EQ(post.size(), 50u);
  EXPECT_EQ(count_at(post, {2, 2}), 50u);
  EXPECT_EQ(post.collided_count(), 0u);
}

TEST(Update, FarClusterGetsNoMass) {
  const GridMap map = oracle::open_map(9, 9);
  const ObservationNoise noise;
  const Cell obs{4, 4};
  const Cell near{4, 5};
  const Cell far{4, 7};
  // Interior weights straight from the kernel: one cell away reads 0.04, three
  // cells away is outside the 3x3 support.
  EXPECT_NEAR(noise.likelihood(map, near, obs), 0.04, 1e-12);
  EXPECT_EQ(noise.likelihood(map, far, obs), 0.0);
  Rng rng(8);
  const Belief post = update(spread({near, far}, 50), map, obs, noise, rng);
  EXPECT_EQ(count_at(post, near), 100u);
  EXPECT_EQ(count_at(post, far), 0u);
}

TEST(Update, MassFollowsLikelihoodRatio) {
  const GridMap map = oracle::open_map(9, 9);
  const ObservationNoise noise;
  // 50 particles on the observed cell (weight 0.68) and 50 one cell off (0.04):
  // expected share of the first is 0.68 / 0.72. Systematic resampling keeps the
  // realized count within one particle of n * share.
  Rng rng(8);
  const Belief post = update(spread({{4, 4}, {4, 5}}, 50), map, {4, 4}, noise, rng);
  const double expected = 100.0 * 0.68 / 0.72;
  EXPECT_LE(std::abs(static_cast<double>(count_at(post, {4, 4})) - expected), 1.0);
}

TEST(SystematicResample, ExpectedCountsWithinThreeSigma) {
  const std::vector<double> weights{0.1, 0.4, 0.05, 0.25, 0.2};
  const std::size_t n = 20;
  const int trials = 10000;
  Rng rng(13);
  std::vector<double> totals(weights.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto picks = systematic_resample(weights, n, rng);
    ASSERT_EQ(picks.size(), n);
    for (std::size_t i : picks) totals[i] += 1.0;
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double mean = totals[i] / trials;
    const double expect = n * weights[i];
    // Multinomial per-trial variance bounds the systematic scheme's variance.
    const double sigma = std::sqrt(n * weights[i] * (1.0 - weights[i]) / trials);
    EXPECT_NEAR(mean, expect, 3.0 * sigma) << "index " << i;
  }
}

TEST(SystematicResample, UnnormalizedAndErrors) {
  Rng rng(1);
  const std::vector<double> w{0.0, 3.0, 0.0};
  for (std::size_t i : systematic_resample(w, 10, rng)) EXPECT_EQ(i, 1u);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(systematic_resample(zero, 4, rng), std::invalid_argument);
}

TEST(BeliefMean, RoundingAndSnapping) {
  const GridMap open = oracle::open_map(8, 8);
  EXPECT_EQ(belief_mean(init_belief({4, 7}, 10), open), (Cell{4, 7}));
  EXPECT_EQ(belief_mean(spread({{2, 2}, {2, 4}}, 50), open), (Cell{2, 3}));
  // Half-way between rows 2 and 3 and columns 2 and 3 rounds up on both axes.
  EXPECT_EQ(belief_mean(spread({{2, 2}, {3, 3}}, 5), open), (Cell{3, 3}));

  // Block (2,3): its BFS ring in N,E,S,W order starts with (1,3).
  const GridMap blocked = load_map(
      "S.....\n"
      "......\n"
      "...#..\n"
      "......\n"
      ".....G\n");
  EXPECT_EQ(belief_mean(spread({{2, 2}, {2, 4}}, 50), blocked), (Cell{1, 3}));
}

TEST(BeliefMean, IgnoresCollidedUnlessAllCollided) {
  const GridMap map = oracle::open_map(8, 8);
  Belief b = spread({{1, 1}, {5, 5}}, 10);
  for (std::size_t i = 10; i < 20; ++i) b.particles[i].collided = true;
  EXPECT_EQ(belief_mean(b, map), (Cell{1, 1}));
  for (Particle& p : b.particles) p.collided = true;
  EXPECT_EQ(belief_mean(b, map), (Cell{3, 3}));
}

TEST(PlannerObservation, Examples) {
  const GridMap map = oracle::open_map(10, 10);
  const Cell g = map.goal()[0];
  EXPECT_EQ(planner_observation(init_belief(g, 100), map).d_hat, 0);
  EXPECT_EQ(planner_observation(init_belief(g, 100), map).p_hat, 0.0);

  Belief b = init_belief({2, 2}, 100);
  for (std::size_t i = 0; i < 40; ++i) b.particles[i].collided = true;
  EXPECT_DOUBLE_EQ(planner_observation(b, map).p_hat, 0.40);

  // Cells 4 and 6 steps from the goal; the mean is the 5-step cell between them.
  const Cell four{9, 5};
  const Cell six{9, 3};
  ASSERT_EQ(oracle::flood_distance(map, four), 4);
  ASSERT_EQ(oracle::flood_distance(map, six), 6);
  const PlannerObservation mid = planner_observation(spread({four, six}, 50), map);
  EXPECT_EQ(mid.d_hat, 5);
  EXPECT_EQ(mid.d_hat, oracle::flood_distance(map, {9, 4}));
}

TEST(PlannerObservation, UnreachableSentinel) {
  const GridMap map = load_map("S#..\n.#.G\n");
  EXPECT_EQ(planner_observation(init_belief({0, 0}, 10), map).d_hat, map.cell_count());
}

TEST(PlannerObservation, NoiselessUpdateGivesTrueDistance) {
  const GridMap map = load_map_file(W2L_MAP_DIR "/tunnel12.map");
  Rng rng(6);
  Belief b = init_belief(map.start(), 100);
  for (int i = 0; i < 5; ++i) b = propagate(b, map, Direction::West, {}, rng);
  const Cell truth{5, 8};
  b = update(b, map, truth, ObservationNoise::identity(), rng);
  EXPECT_EQ(planner_observation(b, map).d_hat, oracle::flood_distance(map, truth));
}

}  // namespace
}  // namespace w2l
