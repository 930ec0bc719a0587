#pragma once

// Color-filter attack engine: fitness construction over transform samples,
// elastic termination, and the AS / without-transforms / full variants.

#include <cstdint>
#include <optional>
#include <string>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"
#include "chromafool/pso.hpp"
#include "chromafool/transforms.hpp"

namespace chromafool {

enum class Variant { AS, WithoutTransforms, Full };
enum class FitnessForm { Alg1, Eq5 };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);  // as | woq | full
std::string to_string(FitnessForm f);
FitnessForm parse_fitness_form(const std::string& text);  // alg1 | eq5

inline constexpr std::uint64_t kDefaultQueryLimit = 10'000;
inline constexpr std::uint64_t kDefaultFullQueryLimit = 150'000;

struct AttackConfig {
  Variant variant = Variant::Full;
  double quality_weight = 0.6;
  std::size_t n_samples = 40;
  std::uint64_t query_limit = 0;  // 0 selects the variant default
  FitnessForm fitness_form = FitnessForm::Alg1;
  double fool_expectation_max = 0.1;
  double fooled_quality_min = 0.5;
  std::size_t verify_samples = 40;
  // Start a fresh swarm when one stagnates without fooling anything, as long
  // as budget remains.
  bool restart_without_success = true;
  TransformRanges transforms;
  pso::PsoConfig pso;
  std::uint64_t seed = 0;

  void validate() const;
  // Variant-forced settings applied: AS uses one untransformed sample and no
  // quality term; WithoutTransforms uses one untransformed sample.
  AttackConfig effective() const;
  bool uses_transforms() const { return variant == Variant::Full; }
};

// Tally of one fitness evaluation (one candidate filter, n_samples queries).
struct EvalStats {
  std::size_t samples = 0;
  std::size_t fooled = 0;          // err
  double fooled_quality_sum = 0.0;  // sum of Q over fooled samples
  double quality_loss = 0.0;        // err_q: sum of (1 - Q) over fooled samples

  double fool_rate() const { return samples == 0 ? 0.0 : static_cast<double>(fooled) / static_cast<double>(samples); }
  double mean_fooled_quality() const {
    return fooled == 0 ? 0.0 : fooled_quality_sum / static_cast<double>(fooled);
  }
};

// 1 - err/N + lambda * err_q / err, quality term 0 when err == 0.
double alg1_fitness(const EvalStats& s, double quality_weight);
// (N - err)/N + lambda * err_q / N.
double eq5_fitness(const EvalStats& s, double quality_weight);
double fitness_value(const EvalStats& s, const AttackConfig& config);

// err/N >= 1 - fool_expectation_max and mean fooled quality >= fooled_quality_min.
bool elastic_stop(const EvalStats& s, const AttackConfig& config);

// apply_filter (Integer mode) followed by the transform composition.
Image colorize_and_transform(const Image& x, const ColorFilter& filter, const TransformParams& t);

// Best fooled sample of an evaluation, kept so the image can be rebuilt.
struct FooledSample {
  TransformParams params;
  bool transformed = false;
  PipelineVerdict verdict;
};

struct SampledEvaluation {
  EvalStats stats;
  std::optional<FooledSample> best_fooled;  // highest quality, earliest on ties
};

// Queries n samples of t_k(colorize(x, filter)); draws come from rng when
// transformed, otherwise the colorized image is queried as is. Requires
// ledger headroom >= n (QueryLimitExhausted otherwise, nothing consumed).
SampledEvaluation evaluate_samples(const Image& x, const ColorFilter& filter, OracleSession& session,
                                   const TransformRanges& ranges, std::size_t n, bool transformed, Rng& rng);

double fitness_alg1(const Image& x, const ColorFilter& filter, OracleSession& session, const AttackConfig& config,
                    Rng& rng);
double fitness_eq5(const Image& x, const ColorFilter& filter, OracleSession& session, const AttackConfig& config,
                   Rng& rng);
// One query on the colorized image: 1 if labeled Spoofing, else 0.
double fitness_as(const Image& x, const ColorFilter& filter, OracleSession& session);

struct AttackRecord {
  std::string image_id;
  std::string identity;
  bool success = false;
  bool vacuous = false;  // input already Bonafide
  std::uint64_t queries_used = 0;          // includes the initial check
  std::uint64_t verification_queries = 0;  // bookkept separately
  ColorFilter final_filter;
  double best_fitness = 0.0;
  double adversariality = 0.0;  // fooled fraction of the verification batch
  double final_quality = 0.0;   // quality of the returned adversarial image
  bool adv_bonafide = false;    // a fooled adversarial image is returned
  bool matched_correct_identity = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  std::string stop_reason;

  bool operator==(const AttackRecord&) const = default;
};

struct AttackOutcome {
  AttackRecord record;
  std::optional<Image> adversarial;
};

// Runs one attack. The oracle must label x Spoofing (checked with one
// bookkept query). identity is compared against the returned match id.
AttackOutcome attack_one(const Image& x, const std::string& image_id, const std::string& identity, Oracle& oracle,
                         const AttackConfig& config);

}  // namespace chromafool
