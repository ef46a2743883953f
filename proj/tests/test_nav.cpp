#include <gtest/gtest.h>

#include <climits>
#include <cstdlib>

#include "oracles.hpp"
#include "w2l/nav.hpp"

namespace w2l {
namespace {

void expect_valid_path(const GridMap& map, const Path& p) {
  ASSERT_GE(p.size(), 1u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_TRUE(map.is_free(p.waypoints[i]));
    if (i > 0) {
      const Cell a = p.waypoints[i - 1];
      const Cell b = p.waypoints[i];
      EXPECT_EQ(std::abs(a.row - b.row) + std::abs(a.col - b.col), 1);
    }
  }
  EXPECT_TRUE(map.is_goal(p.waypoints.back()));
}

TEST(ShortestPath, AdjacentAndAtGoal) {
  const GridMap map = oracle::open_map(5, 5);
  const Path next_to = shortest_path(map, {4, 3}, map.goal());
  EXPECT_EQ(next_to.size(), 2u);
  const Path at = shortest_path(map, {4, 4}, map.goal());
  EXPECT_EQ(at.size(), 1u);
  EXPECT_EQ(at.steps(), 0);
}

TEST(ShortestPath, TieBreakPrefersNorthThenEast) {
  const GridMap map = load_map("...G\n....\nS...\n");
  const Path p = shortest_path(map, map.start(), map.goal());
  ASSERT_EQ(p.size(), 6u);
  EXPECT_EQ(p.waypoints[1], (Cell{1, 0}));
  EXPECT_EQ(p.waypoints[2], (Cell{0, 0}));
  EXPECT_EQ(p.waypoints[3], (Cell{0, 1}));
}

TEST(ShortestPath, Unreachable) {
  const GridMap map = load_map("S#G\n.#.\n");
  EXPECT_THROW(shortest_path(map, map.start(), map.goal()), UnreachableError);
}

TEST(ShortestPath, MatchesFloodFillOnBundledMaps) {
  for (const char* name : {"tunnel12", "maze64a", "maze64b"}) {
    const GridMap base = load_map_file(std::string(W2L_MAP_DIR "/") + name + ".map");
    Rng rng(17);
    const std::vector<Cell> free = base.free_cells();
    for (int trial = 0; trial < 25; ++trial) {
      const Cell goal = free[rng() % free.size()];
      const GridMap map = base.with_start_goal(base.start(), {goal});
      const std::vector<int> oracle = oracle::flood_fill(map);
      const DistanceField field(map, map.goal());
      for (int probe = 0; probe < 20; ++probe) {
        const Cell from = free[rng() % free.size()];
        const int expected = oracle[from.row * map.width() + from.col];
        if (expected == INT_MAX) {
          EXPECT_FALSE(field.reachable(from));
          continue;
        }
        const Path p = shortest_path(map, from, field);
        EXPECT_EQ(p.steps(), expected) << name;
        EXPECT_EQ(p.waypoints.front(), from);
        expect_valid_path(map, p);
      }
    }
  }
}

TEST(NextCommand, AdjacentWaypoint) {
  const GridMap map = oracle::open_map(5, 5);
  Path p{{{2, 1}, {2, 2}, {2, 3}}};
  EXPECT_EQ(next_command(p, {2, 2}, map), Direction::East);
  // The mean already sat on the next waypoint, so the head was dropped.
  EXPECT_EQ(p.waypoints.front(), (Cell{2, 2}));
}

TEST(NextCommand, NonAdjacentUsesFirstBfsStep) {
  const GridMap map = oracle::open_map(5, 5);
  Path p{{{1, 2}, {4, 2}}};
  EXPECT_EQ(next_command(p, {2, 2}, map), Direction::South);
}

TEST(NextCommand, Errors) {
  const GridMap map = load_map("S#G\n.#.\n");
  Path single{{{0, 0}}};
  EXPECT_THROW(next_command(single, {0, 0}, map), std::invalid_argument);
  Path across{{{0, 0}, {0, 2}}};
  EXPECT_THROW(next_command(across, {1, 0}, map), UnreachableError);
}

TEST(Truncate, DropsHead) {
  const Path abc{{{0, 0}, {0, 1}, {0, 2}}};
  EXPECT_EQ(truncate(abc).waypoints, (std::vector<Cell>{{0, 1}, {0, 2}}));
  const Path ab{{{0, 0}, {0, 1}}};
  EXPECT_EQ(truncate(ab).waypoints, (std::vector<Cell>{{0, 1}}));
  const Path g{{{3, 3}}};
  EXPECT_EQ(truncate(g).waypoints, g.waypoints);
}

TEST(RandomStartGoal, RespectsSeparation) {
  const GridMap map = oracle::open_map(100, 100);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto [s, g] = random_start_goal(map, 50, rng);
    const GridMap sg = map.with_start_goal(s, {g});
    EXPECT_GE(oracle::flood_distance(sg, s), 50);
  }
}

TEST(RandomStartGoal, ZeroSeparationAndImpossible) {
  const GridMap small = oracle::open_map(3, 3);
  Rng rng(2);
  const auto [s, g] = random_start_goal(small, 0, rng);
  EXPECT_TRUE(small.is_free(s));
  EXPECT_TRUE(small.is_free(g));
  EXPECT_THROW(random_start_goal(small, 50, rng), std::runtime_error);
}

}  // namespace
}  // namespace w2l
