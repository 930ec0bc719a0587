#include "chromafool/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "chromafool/errors.hpp"
#include "chromafool/image_io.hpp"
#include "chromafool/parallel.hpp"

namespace chromafool {

MetricsReport compute_metrics(std::span<const AttackRecord> records, double quality_threshold) {
  MetricsReport m;
  m.n_images = records.size();
  std::uint64_t success_queries = 0;
  double quality_sum = 0.0, adv_sum = 0.0;
  std::size_t passing = 0;
  std::vector<double> adv;
  for (const AttackRecord& r : records) {
    m.total_queries += r.queries_used;
    m.verification_queries += r.verification_queries;
    if (r.vacuous) {
      ++m.n_vacuous;
      continue;
    }
    ++m.n_attacked;
    if (!r.success) continue;
    ++m.n_successes;
    success_queries += r.queries_used;
    quality_sum += r.final_quality;
    adv_sum += r.adversariality;
    adv.push_back(r.adversariality);
    if (r.adv_bonafide && r.final_quality >= quality_threshold && r.matched_correct_identity) ++passing;
  }
  const auto attacked = static_cast<double>(m.n_attacked);
  const auto successes = static_cast<double>(m.n_successes);
  if (m.n_attacked > 0) {
    m.fr = successes / attacked;
    m.oasr = static_cast<double>(passing) / attacked;
  }
  if (m.n_successes > 0) {
    m.aq = static_cast<double>(success_queries) / successes;
    m.aqs = quality_sum / successes;
    m.adv_m = adv_sum / successes;
    double ss = 0.0;
    for (const double a : adv) ss += (a - m.adv_m) * (a - m.adv_m);
    m.adv_s = std::sqrt(ss / successes);
  }
  for (const std::uint64_t b : kCurveBudgets) {
    BudgetPoint p{b, 0, 0.0};
    for (const AttackRecord& r : records) {
      if (!r.vacuous && r.success && r.queries_used <= b) ++p.successes;
    }
    if (m.n_attacked > 0) p.fr = static_cast<double>(p.successes) / attacked;
    m.curve.push_back(p);
  }
  return m;
}

std::uint64_t image_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Image load_working_image(const std::filesystem::path& path) {
  Image img = load_image(path);
  if (img.height() == kWorkingSize && img.width() == kWorkingSize) return img;
  return resize_bilinear(img, kWorkingSize, kWorkingSize);
}

OracleOptions oracle_options(const RunConfig& config, const Manifest& manifest) {
  OracleOptions o;
  o.colorgate = config.colorgate;
  o.transport = config.transport;
  if (config.oracle.kind == OracleSpec::Kind::Colorgate) {
    o.gallery = std::make_shared<const Gallery>(enroll_manifest(manifest));
  }
  return o;
}

BatchResult run_batch(const Manifest& manifest, const OracleFactory& oracles, const BatchOptions& options) {
  manifest.validate();
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].label == Label::Spoofing) targets.push_back(i);
  }
  if (targets.empty()) throw InvalidArgument("manifest has no spoof-labeled entries to attack");
  if (options.adversarial_dir) std::filesystem::create_directories(*options.adversarial_dir);

  const std::size_t requested = options.workers == 0 ? default_workers() : options.workers;
  const std::size_t workers = options.deterministic ? 1 : std::min(requested, targets.size());
  std::vector<std::unique_ptr<Oracle>> backends;
  for (std::size_t w = 0; w < workers; ++w) backends.push_back(oracles());

  BatchResult result;
  result.records.resize(targets.size());
  std::mutex mutex;
  parallel_for(targets.size(), workers, [&](std::size_t t, std::size_t w) {
    const ManifestEntry& e = manifest.entries[targets[t]];
    const Image x = load_working_image(manifest.resolve(e));
    AttackConfig cfg = options.attack;
    cfg.seed = image_seed(options.attack.seed, targets[t]);
    const std::string id = Manifest::image_id(e);
    AttackOutcome out = attack_one(x, id, e.identity, *backends[w], cfg);
    if (options.adversarial_dir && out.adversarial) {
      save_image(*out.adversarial, *options.adversarial_dir / (id + ".png"));
    }
    result.records[t] = std::move(out.record);
    if (options.on_record) {
      std::lock_guard lock(mutex);
      options.on_record(result.records[t]);
    }
  });
  std::ranges::stable_sort(result.records, {}, &AttackRecord::image_id);
  result.metrics = compute_metrics(result.records, options.quality_threshold);
  return result;
}

std::vector<UniversalImage> load_spoof_images(const Manifest& manifest) {
  manifest.validate();
  std::vector<UniversalImage> out;
  for (const auto& e : manifest.entries) {
    if (e.label != Label::Spoofing) continue;
    out.push_back({Manifest::image_id(e), e.identity, load_working_image(manifest.resolve(e))});
  }
  return out;
}

}  // namespace chromafool
