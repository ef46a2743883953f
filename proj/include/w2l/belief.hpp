#ifndef W2L_BELIEF_HPP
#define W2L_BELIEF_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "w2l/gridworld.hpp"
#include "w2l/nav.hpp"

namespace w2l {

struct Particle {
  Cell pose;
  // Set when the particle's last motion draw hit an obstacle. Absorbing until
  // the next observation update.
  bool collided = false;
};

/// Fixed-size particle set over grid cells.
struct Belief {
  std::vector<Particle> particles;

  std::size_t size() const noexcept { return particles.size(); }
  std::size_t collided_count() const noexcept;
};

/// The two features fed to every high-level planner.
struct PlannerObservation {
  double p_hat = 0.0;  // fraction of collided particles
  int d_hat = 0;       // BFS steps from the snapped belief mean to the goal
};

Belief init_belief(Cell start, std::size_t n);

Belief propagate(const Belief& belief, const GridMap& map, Direction dir,
                 const TransitionNoise& noise, Rng& rng);

/// Reweights by the observation likelihood and resamples systematically back
/// to the same size. Collided particles get zero weight; if nothing survives
/// the whole set collapses onto the observation.
Belief update(const Belief& belief, const GridMap& map, Cell observed,
              const ObservationNoise& noise, Rng& rng);

/// Systematic (low-variance) resampling: `n` indices drawn with one uniform
/// offset. Weights need not be normalized but must have a positive sum.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             Rng& rng);

/// Mean of the non-collided particles (all particles when every one collided),
/// rounded half-up per axis, then moved to the nearest free cell by BFS when
/// the rounded cell is blocked or off the map.
Cell belief_mean(const Belief& belief, const GridMap& map);

/// Nearest free cell to `c` in BFS order (North, East, South, West).
Cell snap_to_free(Cell c, const GridMap& map);

PlannerObservation planner_observation(const Belief& belief, const GridMap& map,
                                       const DistanceField& to_goal);
PlannerObservation planner_observation(const Belief& belief, const GridMap& map);

}  // namespace w2l

#endif  // W2L_BELIEF_HPP
