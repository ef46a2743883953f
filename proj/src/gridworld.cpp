#include "w2l/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace w2l {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::North:
      return "N";
    case Direction::East:
      return "E";
    case Direction::South:
      return "S";
    case Direction::West:
      return "W";
  }
  return "?";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Active:
      return "active";
    case Status::ReachedGoal:
      return "goal";
    case Status::Failed:
      return "failed";
  }
  return "?";
}

MapParseError::MapParseError(const std::string& what, int line, int column)
    : std::runtime_error("map:" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                         what),
      line_(line),
      column_(column) {}

GridMap::GridMap(int width, int height, std::vector<bool> obstacles, Cell start,
                 std::vector<Cell> goal)
    : width_(width),
      height_(height),
      obstacles_(std::move(obstacles)),
      goal_mask_(static_cast<std::size_t>(width) * height, false),
      start_(start),
      goal_(std::move(goal)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (obstacles_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("obstacle grid size does not match dimensions");
  }
  if (!is_free(start_)) throw std::invalid_argument("start cell is not free");
  if (goal_.empty()) throw std::invalid_argument("no goal cell");
  for (const Cell& g : goal_) {
    if (!is_free(g)) throw std::invalid_argument("goal cell is not free");
    goal_mask_[index(g)] = true;
  }
}

GridMap GridMap::with_start_goal(Cell start, std::vector<Cell> goal) const {
  return GridMap(width_, height_, obstacles_, start, std::move(goal));
}

std::vector<Cell> GridMap::free_cells() const {
  std::vector<Cell> cells;
  for (int i = 0; i < cell_count(); ++i) {
    if (!obstacles_[i]) cells.push_back(cell_at(i));
  }
  return cells;
}

GridMap load_map(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw MapParseError("empty map", 1, 1);

  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<bool> obstacles(static_cast<std::size_t>(width) * height, false);
  std::vector<Cell> starts;
  std::vector<Cell> goal;
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      throw MapParseError("ragged row (expected " + std::to_string(width) + " columns, got " +
                              std::to_string(rows[r].size()) + ")",
                          r + 1, static_cast<int>(std::min<std::size_t>(rows[r].size(), width)) + 1);
    }
    for (int c = 0; c < width; ++c) {
      switch (rows[r][c]) {
        case '#':
          obstacles[r * width + c] = true;
          break;
        case '.':
          break;
        case 'S':
          starts.push_back({r, c});
          break;
        case 'G':
          goal.push_back({r, c});
          break;
        default:
          throw MapParseError(std::string("unexpected character '") + rows[r][c] + "'", r + 1,
                              c + 1);
      }
    }
  }
  if (width == 0) throw MapParseError("empty map", 1, 1);
  if (starts.empty()) throw MapParseError("no start cell", height, 1);
  if (starts.size() > 1) {
    throw MapParseError("more than one start cell", starts[1].row + 1, starts[1].col + 1);
  }
  if (goal.empty()) throw MapParseError("no goal cell", height, 1);
  return GridMap(width, height, std::move(obstacles), starts.front(), std::move(goal));
}

GridMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

std::string serialize_map(const GridMap& map) {
  std::string out;
  out.reserve(static_cast<std::size_t>(map.width() + 1) * map.height());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{r, c};
      if (!map.is_free(cell)) {
        out += '#';
      } else if (cell == map.start()) {
        out += 'S';
      } else if (map.is_goal(cell)) {
        out += 'G';
      } else {
        out += '.';
      }
    }
    out += '\n';
  }
  return out;
}

TransitionNoise TransitionNoise::with_forward(double p) {
  return {p, (1.0 - p) / 2.0, (1.0 - p) / 2.0};
}

void TransitionNoise::validate() const {
  for (double p : {forward, left, right}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("transition probability outside [0,1]");
  }
  if (std::abs(forward + left + right - 1.0) > 1e-9) {
    throw std::invalid_argument("transition probabilities must sum to 1");
  }
}

ObservationNoise ObservationNoise::identity() {
  ObservationNoise n;
  n.kernel.fill(0.0);
  n.kernel[4] = 1.0;
  return n;
}

ObservationNoise ObservationNoise::with_center(double p) {
  ObservationNoise n;
  n.kernel.fill((1.0 - p) / 8.0);
  n.kernel[4] = p;
  return n;
}

void ObservationNoise::validate() const {
  double total = 0.0;
  for (double p : kernel) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative observation kernel entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("observation kernel must sum to 1");
}

double ObservationNoise::likelihood(const GridMap& map, Cell pose, Cell observed) const {
  const int dr = observed.row - pose.row;
  const int dc = observed.col - pose.col;
  if (std::abs(dr) > 1 || std::abs(dc) > 1 || !map.in_bounds(observed)) return 0.0;
  double support = 0.0;
  for (int r = -1; r <= 1; ++r) {
    for (int c = -1; c <= 1; ++c) {
      if (map.in_bounds({pose.row + r, pose.col + c})) support += at(r, c);
    }
  }
  return support > 0.0 ? at(dr, dc) / support : 0.0;
}

int default_episode_cap(const GridMap& map) { return 4 * (map.width() + map.height()); }

EnvState reset_env(const GridMap& map) { return {map.start(), Status::Active, 0}; }

EnvState step_move(const EnvState& state, const GridMap& map, Direction dir,
                   const TransitionNoise& noise, int episode_cap, Rng& rng) {
  EnvState next = state;
  const double u = uniform01(rng);
  Direction actual = dir;
  if (u >= noise.forward) actual = u < noise.forward + noise.left ? left_of(dir) : right_of(dir);
  const Cell target = neighbor(state.true_pose, actual);
  ++next.steps_taken;
  if (!map.is_free(target)) {
    next.status = Status::Failed;
    return next;
  }
  next.true_pose = target;
  if (map.is_goal(target)) {
    next.status = Status::ReachedGoal;
  } else if (next.steps_taken >= episode_cap) {
    next.status = Status::Failed;
  }
  return next;
}

EnvState step_idle(const EnvState& state, int episode_cap) {
  EnvState next = state;
  ++next.steps_taken;
  if (next.steps_taken >= episode_cap) next.status = Status::Failed;
  return next;
}

Cell observe_pose(const EnvState& state, const ObservationNoise& noise, const GridMap& map,
                  Rng& rng) {
  const Cell pose = state.true_pose;
  std::array<double, 9> mass{};
  double total = 0.0;
  for (int k = 0; k < 9; ++k) {
    const Cell c{pose.row + k / 3 - 1, pose.col + k % 3 - 1};
    mass[k] = map.in_bounds(c) ? noise.kernel[k] : 0.0;
    total += mass[k];
  }
  double u = uniform01(rng) * total;
  for (int k = 0; k < 9; ++k) {
    if (mass[k] <= 0.0) continue;
    if (u < mass[k]) return {pose.row + k / 3 - 1, pose.col + k % 3 - 1};
    u -= mass[k];
  }
  // Rounding left us past the last bucket; return the last supported cell.
  for (int k = 8; k >= 0; --k) {
    if (mass[k] > 0.0) return {pose.row + k / 3 - 1, pose.col + k % 3 - 1};
  }
  return pose;
}

}  // namespace w2l
