#pragma once

// Run configuration: an INI file with sections [attack], [pso], [transforms]
// and [oracle]. Missing keys keep their defaults; unknown sections or keys
// are errors.
//
//   [attack]      variant, quality_weight, n_samples, query_limit, fitness_form,
//                 fool_expectation_max, fooled_quality_min, verify_samples,
//                 restart_without_success, quality_threshold, workers, seed
//   [pso]         n_particles, max_iterations, inertia, cognitive, social,
//                 velocity_clamp, stagnation_limit
//   [transforms]  illumination_coeff, illumination_center, illumination_radius,
//                 brightness_coeff, gamma_coeff, translation, rotation, crop
//                 (each "lo, hi"), gaussian_kernel (list), illumination_probability
//   [oracle]      spec, secret_chroma (three numbers), tolerance,
//                 match_threshold, max_retries, initial_backoff_ms, timeout_ms

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "chromafool/attack.hpp"
#include "chromafool/oracle.hpp"

namespace chromafool {

struct RunConfig {
  AttackConfig attack;
  OracleSpec oracle;
  ColorGateParams colorgate;
  TransportOptions transport;
  double quality_threshold = 0.3;  // OASR quality pass mark
  std::size_t workers = 0;         // 0 selects the number of logical cores

  void validate() const;
};

RunConfig parse_config(const std::string& text);
// Throws NotFoundError for a missing file.
RunConfig load_config(const std::filesystem::path& path);

inline constexpr const char* kSeedEnv = "CHROMAFOOL_SEED";

// Parses CHROMAFOOL_SEED when set. Throws ConfigError on a non-integer value.
std::optional<std::uint64_t> seed_from_env();

}  // namespace chromafool
