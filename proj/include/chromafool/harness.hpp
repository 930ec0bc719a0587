#pragma once

// Batch orchestration: one attack per spoof-labeled manifest entry on a
// bounded worker pool, then the dataset metrics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chromafool/attack.hpp"
#include "chromafool/config.hpp"
#include "chromafool/manifest.hpp"
#include "chromafool/universal.hpp"

namespace chromafool {

inline constexpr std::array<std::uint64_t, 5> kCurveBudgets{10, 100, 1'000, 10'000, 100'000};

struct BudgetPoint {
  std::uint64_t budget = 0;
  std::size_t successes = 0;  // successes with queries_used <= budget
  double fr = 0.0;

  bool operator==(const BudgetPoint&) const = default;
};

struct MetricsReport {
  std::size_t n_images = 0;    // records considered
  std::size_t n_vacuous = 0;   // already Bonafide, excluded from the rates
  std::size_t n_attacked = 0;
  std::size_t n_successes = 0;
  double fr = 0.0;
  std::optional<double> aq;  // absent without successes
  double aqs = 0.0;
  double oasr = 0.0;
  double adv_m = 0.0;  // over successes
  double adv_s = 0.0;  // population standard deviation
  std::uint64_t total_queries = 0;
  std::uint64_t verification_queries = 0;
  std::vector<BudgetPoint> curve;

  bool operator==(const MetricsReport&) const = default;
};

// Records are taken in the given order; callers sort by image id first.
MetricsReport compute_metrics(std::span<const AttackRecord> records, double quality_threshold);

// splitmix64 of (seed, index): the per-image attack seed.
std::uint64_t image_seed(std::uint64_t seed, std::size_t index);

// Loads an image and brings it to the working resolution (bilinear).
Image load_working_image(const std::filesystem::path& path);

// Builtin colorgate oracles enroll one template per manifest identity.
OracleOptions oracle_options(const RunConfig& config, const Manifest& manifest);

struct BatchOptions {
  AttackConfig attack;
  double quality_threshold = 0.3;
  std::size_t workers = 0;  // 0 selects the logical core count
  bool deterministic = false;  // forces one worker
  std::optional<std::filesystem::path> adversarial_dir;  // PNGs of returned images
  std::function<void(const AttackRecord&)> on_record;    // called under a lock
};

struct BatchResult {
  std::vector<AttackRecord> records;  // sorted by image id
  MetricsReport metrics;
};

// Throws InvalidArgument when the manifest has no spoof-labeled entries.
BatchResult run_batch(const Manifest& manifest, const OracleFactory& oracles, const BatchOptions& options);

// Spoof-labeled entries of a manifest, loaded at the working resolution.
std::vector<UniversalImage> load_spoof_images(const Manifest& manifest);

}  // namespace chromafool
