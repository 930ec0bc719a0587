#pragma once

// Particle swarm minimization over the unit cube [0,1]^3 (the color-filter
// search space).

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace chromafool::pso {

using Vec3 = std::array<double, 3>;
using Rng = std::mt19937_64;

struct PsoConfig {
  std::size_t n_particles = 30;
  std::size_t max_iterations = 100;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp = 0.5;  // per axis
  std::size_t stagnation_limit = 10;
  std::uint64_t seed = 0;
  // Evaluate the particles of one step on several threads. Only valid when
  // the fitness function is safe to call concurrently.
  bool concurrent_fitness = false;

  void validate() const;
};

struct Particle {
  Vec3 position{};
  Vec3 velocity{};
  Vec3 best_position{};
  double best_fitness = 0.0;
};

struct SwarmState {
  std::vector<Particle> particles;
  Vec3 global_best_position{};
  double global_best_fitness = 0.0;
  std::size_t iteration = 0;
  std::size_t stagnation_counter = 0;
  std::size_t evaluations = 0;
};

using Fitness = std::function<double(const Vec3&)>;
using StopPredicate = std::function<bool(const SwarmState&)>;

// Positions i.i.d. uniform on [0,1]^3, zero velocities, bests from one
// evaluation of every particle (index order).
SwarmState init_swarm(const PsoConfig& config, const Fitness& fitness, Rng& rng);

// One synchronous update: velocities and positions of all particles first,
// then evaluations, then the best-so-far reduction. The global best only
// moves on strict improvement, which is also what resets stagnation.
SwarmState step(SwarmState state, const PsoConfig& config, const Fitness& fitness, Rng& rng);

enum class StopReason { Predicate, Stagnation, MaxIterations };

struct PsoResult {
  Vec3 best_position{};
  double best_fitness = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  StopReason reason = StopReason::MaxIterations;
};

// init + step until stop(state), stagnation_counter >= stagnation_limit or
// iteration == max_iterations. stop is checked after every evaluation round.
PsoResult optimize(const PsoConfig& config, const Fitness& fitness, const StopPredicate& stop, Rng& rng);
PsoResult optimize(const PsoConfig& config, const Fitness& fitness, const StopPredicate& stop);

}  // namespace chromafool::pso
