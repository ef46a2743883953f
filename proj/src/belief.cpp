#include "w2l/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace w2l {

std::size_t Belief::collided_count() const noexcept {
  std::size_t n = 0;
  for (const Particle& p : particles) n += p.collided ? 1 : 0;
  return n;
}

Belief init_belief(Cell start, std::size_t n) {
  if (n == 0) throw std::invalid_argument("belief needs at least one particle");
  return Belief{std::vector<Particle>(n, Particle{start, false})};
}

Belief propagate(const Belief& belief, const GridMap& map, Direction dir,
                 const TransitionNoise& noise, Rng& rng) {
  Belief next = belief;
  for (Particle& p : next.particles) {
    if (p.collided) continue;
    const double u = uniform01(rng);
    Direction actual = dir;
    if (u >= noise.forward) actual = u < noise.forward + noise.left ? left_of(dir) : right_of(dir);
    const Cell target = neighbor(p.pose, actual);
    if (map.is_free(target)) {
      p.pose = target;
    } else {
      p.collided = true;
    }
  }
  return next;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("resampling weights sum to zero");
  std::vector<std::size_t> picks;
  picks.reserve(n);
  const double spacing = total / static_cast<double>(n);
  double pointer = uniform01(rng) * spacing;
  double cumulative = weights[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (pointer >= cumulative && i + 1 < weights.size()) cumulative += weights[++i];
    picks.push_back(i);
    pointer += spacing;
  }
  return picks;
}

Belief update(const Belief& belief, const GridMap& map, Cell observed,
              const ObservationNoise& noise, Rng& rng) {
  const std::size_t n = belief.size();
  std::vector<double> weights(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Particle& p = belief.particles[i];
    if (!p.collided) weights[i] = noise.likelihood(map, p.pose, observed);
    total += weights[i];
  }
  if (!(total > 0.0)) return init_belief(observed, n);

  Belief next;
  next.particles.reserve(n);
  for (std::size_t idx : systematic_resample(weights, n, rng)) {
    next.particles.push_back(Particle{belief.particles[idx].pose, false});
  }
  return next;
}

Cell snap_to_free(Cell c, const GridMap& map) {
  c.row = std::clamp(c.row, 0, map.height() - 1);
  c.col = std::clamp(c.col, 0, map.width() - 1);
  if (map.is_free(c)) return c;
  std::vector<bool> seen(static_cast<std::size_t>(map.cell_count()), false);
  std::queue<Cell> frontier;
  frontier.push(c);
  seen[map.index(c)] = true;
  while (!frontier.empty()) {
    const Cell x = frontier.front();
    frontier.pop();
    for (Direction dir : kAllDirections) {
      const Cell nb = neighbor(x, dir);
      if (!map.in_bounds(nb) || seen[map.index(nb)]) continue;
      if (map.is_free(nb)) return nb;
      seen[map.index(nb)] = true;
      frontier.push(nb);
    }
  }
  throw std::runtime_error("map has no free cell to snap to");
}

Cell belief_mean(const Belief& belief, const GridMap& map) {
  if (belief.particles.empty()) throw std::invalid_argument("empty belief");
  const bool all_collided = belief.collided_count() == belief.size();
  double sum_r = 0.0;
  double sum_c = 0.0;
  std::size_t count = 0;
  for (const Particle& p : belief.particles) {
    if (p.collided && !all_collided) continue;
    sum_r += p.pose.row;
    sum_c += p.pose.col;
    ++count;
  }
  const double mean_r = sum_r / static_cast<double>(count);
  const double mean_c = sum_c / static_cast<double>(count);
  const Cell rounded{static_cast<int>(std::floor(mean_r + 0.5)),
                     static_cast<int>(std::floor(mean_c + 0.5))};
  return snap_to_free(rounded, map);
}

PlannerObservation planner_observation(const Belief& belief, const GridMap& map,
                                       const DistanceField& to_goal) {
  PlannerObservation obs;
  obs.p_hat = static_cast<double>(belief.collided_count()) / static_cast<double>(belief.size());
  const Cell mean = belief_mean(belief, map);
  obs.d_hat = to_goal.reachable(mean) ? to_goal.at(mean) : map.cell_count();
  return obs;
}

PlannerObservation planner_observation(const Belief& belief, const GridMap& map) {
  return planner_observation(belief, map, DistanceField(map, map.goal()));
}

}  // namespace w2l
