#include "chromafool/pso.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "chromafool/errors.hpp"

namespace chromafool::pso {
namespace {

double unit(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

double checked(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("fitness returned a non-finite value");
  return value;
}

std::vector<double> evaluate_all(const std::vector<Particle>& particles, const PsoConfig& config,
                                 const Fitness& fitness) {
  std::vector<double> values(particles.size());
  const std::size_t workers =
      config.concurrent_fitness ? std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), particles.size())
                                : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < particles.size(); ++i) values[i] = checked(fitness(particles[i].position));
    return values;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < particles.size(); i += workers) {
            values[i] = checked(fitness(particles[i].position));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return values;
}

}  // namespace

void PsoConfig::validate() const {
  if (n_particles == 0) throw InvalidArgument("pso.n_particles must be positive");
  if (max_iterations == 0) throw InvalidArgument("pso.max_iterations must be positive");
  if (!(inertia > 0.0) || !(cognitive > 0.0) || !(social > 0.0) || !(velocity_clamp > 0.0)) {
    throw InvalidArgument("pso coefficients must be positive");
  }
  if (stagnation_limit < 1) throw InvalidArgument("pso.stagnation_limit must be >= 1");
}

SwarmState init_swarm(const PsoConfig& config, const Fitness& fitness, Rng& rng) {
  config.validate();
  SwarmState state;
  state.particles.resize(config.n_particles);
  for (Particle& p : state.particles) {
    for (double& x : p.position) x = unit(rng);
    p.velocity = {0.0, 0.0, 0.0};
    p.best_position = p.position;
  }
  const auto values = evaluate_all(state.particles, config, fitness);
  state.global_best_fitness = values[0];
  state.global_best_position = state.particles[0].position;
  for (std::size_t i = 0; i < values.size(); ++i) {
    state.particles[i].best_fitness = values[i];
    if (values[i] < state.global_best_fitness) {
      state.global_best_fitness = values[i];
      state.global_best_position = state.particles[i].position;
    }
  }
  state.evaluations = values.size();
  return state;
}

SwarmState step(SwarmState state, const PsoConfig& config, const Fitness& fitness, Rng& rng) {
  const Vec3 gbest = state.global_best_position;
  for (Particle& p : state.particles) {
    for (std::size_t d = 0; d < 3; ++d) {
      const double u1 = unit(rng);
      const double u2 = unit(rng);
      double v = config.inertia * p.velocity[d] + config.cognitive * u1 * (p.best_position[d] - p.position[d]) +
                 config.social * u2 * (gbest[d] - p.position[d]);
      v = std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
      p.velocity[d] = v;
      p.position[d] = std::clamp(p.position[d] + v, 0.0, 1.0);
    }
  }
  const auto values = evaluate_all(state.particles, config, fitness);
  const double previous_best = state.global_best_fitness;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Particle& p = state.particles[i];
    if (values[i] < p.best_fitness) {
      p.best_fitness = values[i];
      p.best_position = p.position;
    }
    if (values[i] < state.global_best_fitness) {
      state.global_best_fitness = values[i];
      state.global_best_position = p.position;
    }
  }
  state.evaluations += values.size();
  ++state.iteration;
  state.stagnation_counter = state.global_best_fitness < previous_best ? 0 : state.stagnation_counter + 1;
  return state;
}

PsoResult optimize(const PsoConfig& config, const Fitness& fitness, const StopPredicate& stop, Rng& rng) {
  SwarmState state = init_swarm(config, fitness, rng);
  StopReason reason = StopReason::MaxIterations;
  if (stop && stop(state)) {
    reason = StopReason::Predicate;
  } else {
    for (;;) {
      if (state.stagnation_counter >= config.stagnation_limit) {
        reason = StopReason::Stagnation;
        break;
      }
      if (state.iteration >= config.max_iterations) {
        reason = StopReason::MaxIterations;
        break;
      }
      state = step(std::move(state), config, fitness, rng);
      if (stop && stop(state)) {
        reason = StopReason::Predicate;
        break;
      }
    }
  }
  return {state.global_best_position, state.global_best_fitness, state.iteration, state.evaluations, reason};
}

PsoResult optimize(const PsoConfig& config, const Fitness& fitness, const StopPredicate& stop) {
  Rng rng(config.seed);
  return optimize(config, fitness, stop, rng);
}

}  // namespace chromafool::pso
