#ifndef W2L_NAV_HPP
#define W2L_NAV_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "w2l/gridworld.hpp"

namespace w2l {

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 4-connected BFS step counts over free cells from a set of source cells.
class DistanceField {
 public:
  static constexpr int kUnreachable = -1;

  DistanceField(const GridMap& map, std::span<const Cell> sources);

  int at(Cell c) const noexcept { return in_bounds(c) ? dist_[c.row * width_ + c.col] : kUnreachable; }
  bool reachable(Cell c) const noexcept { return at(c) != kUnreachable; }

 private:
  bool in_bounds(Cell c) const noexcept {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }

  int width_;
  int height_;
  std::vector<int> dist_;
};

struct Path {
  std::vector<Cell> waypoints;

  std::size_t size() const noexcept { return waypoints.size(); }
  /// Number of moves along the path.
  int steps() const noexcept { return waypoints.empty() ? 0 : static_cast<int>(waypoints.size()) - 1; }
};

/// Minimum-step path from `from` to the nearest cell of `goal`. Ties are broken
/// by neighbor order North, East, South, West. Throws UnreachableError.
Path shortest_path(const GridMap& map, Cell from, std::span<const Cell> goal);

/// Same, reusing a distance field already computed from `goal`.
Path shortest_path(const GridMap& map, Cell from, const DistanceField& to_goal);

/// Motion command from the belief mean toward the path's next waypoint. Drops
/// the head waypoint first when the mean already sits on the next one. When the
/// mean is not adjacent to the next waypoint the first step of a BFS path to it
/// is used. Throws UnreachableError; throws std::invalid_argument when fewer
/// than two waypoints remain.
Direction next_command(Path& path, Cell mean, const GridMap& map);

/// Drops the first waypoint; a single-waypoint path is returned unchanged.
Path truncate(Path path);

/// Free start and goal cells at least `min_separation` BFS steps apart, drawn
/// uniformly by rejection. Throws std::runtime_error after 10^4 failed draws.
std::pair<Cell, Cell> random_start_goal(const GridMap& map, int min_separation, Rng& rng);

}  // namespace w2l

#endif  // W2L_NAV_HPP
