#include "chromafool/attack.hpp"

#include <cmath>
#include <limits>

#include "chromafool/errors.hpp"

namespace chromafool {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(splitmix(seed) ^ stream); }

// Tracks the strictly best evaluation in evaluation order, which is the
// swarm's global best.
struct BestTracker {
  double fitness = std::numeric_limits<double>::infinity();
  ColorFilter filter;
  SampledEvaluation eval;

  void offer(double f, const ColorFilter& candidate, SampledEvaluation e) {
    if (f < fitness) {
      fitness = f;
      filter = candidate;
      eval = std::move(e);
    }
  }
  bool fooled_any() const { return eval.stats.fooled > 0; }
};

Image rebuild(const Image& x, const ColorFilter& filter, const FooledSample& s) {
  return s.transformed ? colorize_and_transform(x, filter, s.params) : apply_filter(x, filter, ColorMode::Integer);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::AS: return "as";
    case Variant::WithoutTransforms: return "woq";
    case Variant::Full: return "full";
  }
  return {};
}

Variant parse_variant(const std::string& text) {
  if (text == "as") return Variant::AS;
  if (text == "woq" || text == "wo") return Variant::WithoutTransforms;
  if (text == "full") return Variant::Full;
  throw InvalidArgument("unknown attack variant '" + text + "' (expected as, woq or full)");
}

std::string to_string(FitnessForm f) { return f == FitnessForm::Alg1 ? "alg1" : "eq5"; }

FitnessForm parse_fitness_form(const std::string& text) {
  if (text == "alg1") return FitnessForm::Alg1;
  if (text == "eq5") return FitnessForm::Eq5;
  throw InvalidArgument("unknown fitness form '" + text + "' (expected alg1 or eq5)");
}

void AttackConfig::validate() const {
  if (!(quality_weight >= 0.0) || !std::isfinite(quality_weight)) {
    throw InvalidArgument("attack.quality_weight must be >= 0");
  }
  if (n_samples < 1) throw InvalidArgument("attack.n_samples must be >= 1");
  if (verify_samples < 1) throw InvalidArgument("attack.verify_samples must be >= 1");
  for (const double t : {fool_expectation_max, fooled_quality_min}) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("attack thresholds must be in [0, 1]");
  }
  transforms.validate();
  pso.validate();
}

AttackConfig AttackConfig::effective() const {
  AttackConfig c = *this;
  if (c.variant != Variant::Full) c.n_samples = 1;
  if (c.variant == Variant::AS) c.quality_weight = 0.0;
  if (c.query_limit == 0) c.query_limit = c.variant == Variant::Full ? kDefaultFullQueryLimit : kDefaultQueryLimit;
  return c;
}

double alg1_fitness(const EvalStats& s, double quality_weight) {
  const double n = static_cast<double>(s.samples);
  const double err = static_cast<double>(s.fooled);
  const double quality_term = s.fooled == 0 ? 0.0 : quality_weight * s.quality_loss / err;
  return 1.0 - err / n + quality_term;
}

double eq5_fitness(const EvalStats& s, double quality_weight) {
  const double n = static_cast<double>(s.samples);
  return (n - static_cast<double>(s.fooled)) / n + quality_weight * s.quality_loss / n;
}

double fitness_value(const EvalStats& s, const AttackConfig& config) {
  return config.fitness_form == FitnessForm::Alg1 ? alg1_fitness(s, config.quality_weight)
                                                  : eq5_fitness(s, config.quality_weight);
}

bool elastic_stop(const EvalStats& s, const AttackConfig& config) {
  if (s.fooled == 0) return false;
  return s.fool_rate() >= 1.0 - config.fool_expectation_max && s.mean_fooled_quality() >= config.fooled_quality_min;
}

Image colorize_and_transform(const Image& x, const ColorFilter& filter, const TransformParams& t) {
  return apply_transforms(apply_filter(x, filter, ColorMode::Integer), t);
}

SampledEvaluation evaluate_samples(const Image& x, const ColorFilter& filter, OracleSession& session,
                                   const TransformRanges& ranges, std::size_t n, bool transformed, Rng& rng) {
  if (session.ledger().headroom() < n) {
    throw QueryLimitExhausted("insufficient query budget for " + std::to_string(n) + " samples");
  }
  const Image colorized = apply_filter(x, filter, ColorMode::Integer);
  SampledEvaluation out;
  out.stats.samples = n;
  for (std::size_t k = 0; k < n; ++k) {
    TransformParams t = TransformParams::identity();
    PipelineVerdict v;
    if (transformed) {
      t = sample_params(ranges, rng);
      v = session.classify(apply_transforms(colorized, t));
    } else {
      v = session.classify(colorized);
    }
    if (v.label != Label::Bonafide) continue;
    ++out.stats.fooled;
    out.stats.fooled_quality_sum += v.quality;
    out.stats.quality_loss += 1.0 - v.quality;
    if (!out.best_fooled || v.quality > out.best_fooled->verdict.quality) {
      out.best_fooled = FooledSample{t, transformed, v};
    }
  }
  return out;
}

double fitness_alg1(const Image& x, const ColorFilter& filter, OracleSession& session, const AttackConfig& config,
                    Rng& rng) {
  const auto e = evaluate_samples(x, filter, session, config.transforms, config.n_samples, true, rng);
  return alg1_fitness(e.stats, config.quality_weight);
}

double fitness_eq5(const Image& x, const ColorFilter& filter, OracleSession& session, const AttackConfig& config,
                   Rng& rng) {
  const auto e = evaluate_samples(x, filter, session, config.transforms, config.n_samples, true, rng);
  return eq5_fitness(e.stats, config.quality_weight);
}

double fitness_as(const Image& x, const ColorFilter& filter, OracleSession& session) {
  const PipelineVerdict v = session.classify(apply_filter(x, filter, ColorMode::Integer));
  return v.label == Label::Spoofing ? 1.0 : 0.0;
}

AttackOutcome attack_one(const Image& x, const std::string& image_id, const std::string& identity, Oracle& oracle,
                         const AttackConfig& config) {
  config.validate();
  const AttackConfig cfg = config.effective();
  OracleSession session(oracle, cfg.query_limit);

  AttackOutcome out;
  AttackRecord& rec = out.record;
  rec.image_id = image_id;
  rec.identity = identity;

  if (session.classify(x).label == Label::Bonafide) {
    rec.vacuous = true;
    rec.queries_used = session.ledger().count();
    rec.stop_reason = "already-bonafide";
    return out;
  }

  const bool transformed = cfg.uses_transforms();
  Rng pso_rng(stream_seed(cfg.seed, 1));
  Rng sample_rng(stream_seed(cfg.seed, 2));
  Rng verify_rng(stream_seed(cfg.seed, 3));

  BestTracker best;
  std::size_t evaluations = 0;
  const pso::Fitness fitness = [&](const pso::Vec3& position) {
    const ColorFilter filter = ColorFilter::from_array(position);
    SampledEvaluation e = evaluate_samples(x, filter, session, cfg.transforms, cfg.n_samples, transformed, sample_rng);
    ++evaluations;
    const double f = fitness_value(e.stats, cfg);
    best.offer(f, filter, std::move(e));
    return f;
  };
  const pso::StopPredicate stop = [&](const pso::SwarmState&) {
    if (cfg.variant == Variant::AS) return best.fooled_any();
    return elastic_stop(best.eval.stats, cfg);
  };

  pso::PsoConfig pso_cfg = cfg.pso;
  pso_cfg.concurrent_fitness = false;  // the fitness closure shares the ledger and rng streams
  try {
    for (;;) {
      const pso::PsoResult r = pso::optimize(pso_cfg, fitness, stop, pso_rng);
      rec.iterations += r.iterations;
      if (r.reason == pso::StopReason::Predicate) {
        rec.stop_reason = cfg.variant == Variant::AS ? "fooled" : "elastic";
        break;
      }
      rec.stop_reason = r.reason == pso::StopReason::Stagnation ? "stagnation" : "max-iterations";
      if (best.fooled_any() || !cfg.restart_without_success) break;
      ++rec.restarts;
    }
  } catch (const QueryLimitExhausted&) {
    rec.stop_reason = "query-limit";
  }

  rec.evaluations = evaluations;
  rec.queries_used = session.ledger().count();
  rec.final_filter = best.filter;
  rec.best_fitness = best.fitness;
  rec.success = best.fooled_any();
  if (!rec.success) return out;

  // Re-evaluate the winning filter on fresh transform draws; these queries may
  // overrun the attack budget by at most verify_samples.
  session.ledger().extend(cfg.verify_samples);
  const SampledEvaluation verify =
      evaluate_samples(x, best.filter, session, cfg.transforms, cfg.verify_samples, true, verify_rng);
  rec.verification_queries = session.ledger().count() - rec.queries_used;
  rec.adversariality = verify.stats.fool_rate();

  std::optional<FooledSample> chosen;
  if (transformed) chosen = verify.best_fooled;
  if (!chosen) chosen = best.eval.best_fooled;
  if (chosen) {
    rec.adv_bonafide = true;
    rec.final_quality = chosen->verdict.quality;
    rec.matched_correct_identity = chosen->verdict.match_id && *chosen->verdict.match_id == identity;
    out.adversarial = rebuild(x, best.filter, *chosen);
  }
  return out;
}

}  // namespace chromafool
