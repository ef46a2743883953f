#ifndef W2L_GRIDWORLD_HPP
#define W2L_GRIDWORLD_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "w2l/rng.hpp"

namespace w2l {

struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Direction : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {Direction::North, Direction::East,
                                                            Direction::South, Direction::West};

constexpr Direction left_of(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 3) % 4);
}

constexpr Direction right_of(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % 4);
}

constexpr Cell neighbor(Cell c, Direction d) {
  switch (d) {
    case Direction::North:
      return {c.row - 1, c.col};
    case Direction::East:
      return {c.row, c.col + 1};
    case Direction::South:
      return {c.row + 1, c.col};
    case Direction::West:
      return {c.row, c.col - 1};
  }
  return c;
}

const char* to_string(Direction d);

class MapParseError : public std::runtime_error {
 public:
  MapParseError(const std::string& what, int line, int column);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Occupancy grid with a start cell and a goal region. Anything off the map
/// behaves like an obstacle.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<bool> obstacles, Cell start, std::vector<Cell> goal);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int cell_count() const noexcept { return width_ * height_; }
  Cell start() const noexcept { return start_; }
  const std::vector<Cell>& goal() const noexcept { return goal_; }

  bool in_bounds(Cell c) const noexcept {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }
  bool is_free(Cell c) const noexcept { return in_bounds(c) && !obstacles_[index(c)]; }
  bool is_goal(Cell c) const noexcept { return in_bounds(c) && goal_mask_[index(c)]; }
  int index(Cell c) const noexcept { return c.row * width_ + c.col; }
  Cell cell_at(int index) const noexcept { return {index / width_, index % width_}; }

  /// Same occupancy, different start and goal.
  GridMap with_start_goal(Cell start, std::vector<Cell> goal) const;

  std::vector<Cell> free_cells() const;

 private:
  int width_;
  int height_;
  std::vector<bool> obstacles_;
  std::vector<bool> goal_mask_;
  Cell start_;
  std::vector<Cell> goal_;
};

GridMap load_map(std::string_view text);
GridMap load_map_file(const std::filesystem::path& path);
std::string serialize_map(const GridMap& map);

struct TransitionNoise {
  double forward = 0.8;
  double left = 0.1;
  double right = 0.1;

  /// Forward mass `p`, remainder split evenly between the two drifts.
  static TransitionNoise with_forward(double p);
  void validate() const;
};

/// 3x3 observation kernel, row-major, centered on the true cell.
struct ObservationNoise {
  std::array<double, 9> kernel{0.04, 0.04, 0.04, 0.04, 0.68, 0.04, 0.04, 0.04, 0.04};

  static ObservationNoise identity();
  /// Center mass `p`, remainder spread evenly over the eight neighbors.
  static ObservationNoise with_center(double p);

  double at(int drow, int dcol) const { return kernel[(drow + 1) * 3 + (dcol + 1)]; }
  double center() const { return kernel[4]; }
  void validate() const;

  /// Probability of reading `observed` when the robot is at `pose`, with the
  /// kernel renormalized over in-bounds cells.
  double likelihood(const GridMap& map, Cell pose, Cell observed) const;
};

enum class Status : std::uint8_t { Active, ReachedGoal, Failed };

const char* to_string(Status s);

struct EnvState {
  Cell true_pose;
  Status status = Status::Active;
  int steps_taken = 0;
};

/// Default episode cap: 4 * (width + height) steps.
int default_episode_cap(const GridMap& map);

EnvState reset_env(const GridMap& map);

/// Stochastic move: forward with `noise.forward`, lateral drift otherwise.
/// Entering an obstacle or leaving the map fails the episode.
EnvState step_move(const EnvState& state, const GridMap& map, Direction dir,
                   const TransitionNoise& noise, int episode_cap, Rng& rng);

/// A decision step without motion (localize or hold). Only advances the step
/// counter and applies the episode cap.
EnvState step_idle(const EnvState& state, int episode_cap);

Cell observe_pose(const EnvState& state, const ObservationNoise& noise, const GridMap& map,
                  Rng& rng);

}  // namespace w2l

#endif  // W2L_GRIDWORLD_HPP
