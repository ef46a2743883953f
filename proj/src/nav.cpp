#include "w2l/nav.hpp"

#include <queue>

namespace w2l {

DistanceField::DistanceField(const GridMap& map, std::span<const Cell> sources)
    : width_(map.width()),
      height_(map.height()),
      dist_(static_cast<std::size_t>(map.cell_count()), kUnreachable) {
  std::queue<Cell> frontier;
  for (const Cell& s : sources) {
    if (map.is_free(s) && dist_[map.index(s)] == kUnreachable) {
      dist_[map.index(s)] = 0;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    const int d = dist_[map.index(c)];
    for (Direction dir : kAllDirections) {
      const Cell n = neighbor(c, dir);
      if (map.is_free(n) && dist_[map.index(n)] == kUnreachable) {
        dist_[map.index(n)] = d + 1;
        frontier.push(n);
      }
    }
  }
}

Path shortest_path(const GridMap& map, Cell from, const DistanceField& to_goal) {
  if (!map.is_free(from)) throw std::invalid_argument("path origin is not a free cell");
  if (!to_goal.reachable(from)) throw UnreachableError("goal unreachable");
  Path path;
  Cell c = from;
  path.waypoints.push_back(c);
  int d = to_goal.at(c);
  while (d > 0) {
    for (Direction dir : kAllDirections) {
      const Cell n = neighbor(c, dir);
      if (to_goal.at(n) == d - 1) {
        c = n;
        break;
      }
    }
    --d;
    path.waypoints.push_back(c);
  }
  return path;
}

Path shortest_path(const GridMap& map, Cell from, std::span<const Cell> goal) {
  return shortest_path(map, from, DistanceField(map, goal));
}

namespace {

std::optional<Direction> adjacent_direction(Cell from, Cell to) {
  for (Direction dir : kAllDirections) {
    if (neighbor(from, dir) == to) return dir;
  }
  return std::nullopt;
}

}  // namespace

Direction next_command(Path& path, Cell mean, const GridMap& map) {
  if (path.size() >= 2 && path.waypoints[1] == mean) path = truncate(std::move(path));
  if (path.size() < 2) throw std::invalid_argument("path has no next waypoint");
  const Cell target = path.waypoints[1];
  if (auto dir = adjacent_direction(mean, target)) return *dir;

  const Cell sources[] = {target};
  const Path detour = shortest_path(map, mean, DistanceField(map, sources));
  return *adjacent_direction(detour.waypoints[0], detour.waypoints[1]);
}

Path truncate(Path path) {
  if (path.size() >= 2) path.waypoints.erase(path.waypoints.begin());
  return path;
}

std::pair<Cell, Cell> random_start_goal(const GridMap& map, int min_separation, Rng& rng) {
  const std::vector<Cell> free = map.free_cells();
  if (free.size() < 2 && min_separation > 0) {
    throw std::runtime_error("map has too few free cells for a start/goal pair");
  }
  if (free.empty()) throw std::runtime_error("map has no free cells");
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  constexpr int kMaxRetries = 10000;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const Cell start = free[pick(rng)];
    const Cell goal = free[pick(rng)];
    if (min_separation > 0 && start == goal) continue;
    const Cell sources[] = {goal};
    const DistanceField field(map, sources);
    if (field.reachable(start) && field.at(start) >= min_separation) return {start, goal};
  }
  throw std::runtime_error("no start/goal pair with separation >= " +
                           std::to_string(min_separation) + " after 10000 draws");
}

}  // namespace w2l
