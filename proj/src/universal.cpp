#include "chromafool/universal.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "chromafool/attack.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/parallel.hpp"

namespace chromafool {
namespace {

using Point = std::array<double, 3>;

double dist2(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < 3; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

std::size_t nearest(const Point& p, const std::vector<Point>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = dist2(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point> plus_plus_seeds(const std::vector<Point>& pts, std::size_t k, std::mt19937_64& rng) {
  std::vector<Point> centers;
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pts[pick(rng)]);
  std::vector<double> d2(pts.size());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = dist2(pts[i], centers[nearest(pts[i], centers)]);
      total += d2[i];
    }
    if (total <= 0.0) {
      // Every point coincides with a center already.
      centers.push_back(pts[pick(rng)]);
      continue;
    }
    double r = std::generate_canonical<double, 53>(rng) * total;
    std::size_t chosen = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      r -= d2[i];
      if (r < 0.0 && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(pts[chosen]);
  }
  return centers;
}

struct Solution {
  std::vector<Point> centers;
  std::vector<std::size_t> assignment;
  double wcss = std::numeric_limits<double>::infinity();
};

Solution lloyd(const std::vector<Point>& pts, std::vector<Point> centers, std::size_t max_iterations) {
  std::vector<std::size_t> assign(pts.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t c = nearest(pts[i], centers);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Point> sums(centers.size(), Point{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) sums[assign[i]][d] += pts[i][d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;  // empty clusters keep their center
      for (std::size_t d = 0; d < 3; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  Solution s{std::move(centers), std::move(assign), 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i) s.wcss += dist2(pts[i], s.centers[s.assignment[i]]);
  return s;
}

}  // namespace

double within_cluster_ss(std::span<const ColorFilter> filters, std::span<const ColorFilter> centers) {
  std::vector<Point> cs;
  for (const auto& c : centers) cs.push_back(c.as_array());
  double total = 0.0;
  for (const auto& f : filters) {
    const Point p = f.as_array();
    total += dist2(p, cs[nearest(p, cs)]);
  }
  return total;
}

std::vector<ColorCluster> cluster_filters(std::span<const ColorFilter> filters, std::span<const std::string> ids,
                                          const ClusterOptions& options) {
  if (options.k == 0) throw InvalidArgument("k must be positive");
  if (filters.size() < options.k) {
    throw InvalidArgument("need at least k = " + std::to_string(options.k) + " filters, got " +
                          std::to_string(filters.size()));
  }
  if (ids.size() != filters.size()) throw InvalidArgument("filters and ids differ in length");
  std::vector<Point> pts;
  pts.reserve(filters.size());
  for (const auto& f : filters) pts.push_back(f.as_array());

  std::mt19937_64 rng(options.seed);
  Solution best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    Solution s = lloyd(pts, plus_plus_seeds(pts, options.k, rng), options.max_lloyd_iterations);
    if (s.wcss < best.wcss) best = std::move(s);
  }

  std::vector<ColorCluster> clusters(options.k);
  for (std::size_t c = 0; c < options.k; ++c) {
    clusters[c].center = ColorFilter::from_array(best.centers[c]);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ColorCluster& cl = clusters[best.assignment[i]];
    ++cl.member_count;
    cl.member_ids.push_back(ids[i]);
  }
  std::ranges::stable_sort(clusters, [](const ColorCluster& a, const ColorCluster& b) {
    if (a.member_count != b.member_count) return a.member_count > b.member_count;
    return a.center.as_array() < b.center.as_array();
  });
  return clusters;
}

UniversalScore evaluate_universal(const ColorFilter& color, std::span<const UniversalImage> images,
                                  const OracleFactory& oracles, const UniversalEvalOptions& options) {
  if (images.empty()) throw InvalidArgument("universal evaluation needs a non-empty dataset");
  if (options.n_samples == 0) throw InvalidArgument("n_samples must be positive");
  color.validate();
  options.transforms.validate();

  struct PerImage {
    bool fooled = false;
    bool passes = false;
    std::size_t fooled_samples = 0;
    double quality_sum = 0.0;
    std::uint64_t queries = 0;
  };
  std::vector<PerImage> results(images.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, images.size()));
  std::vector<std::unique_ptr<Oracle>> backends;
  for (std::size_t w = 0; w < workers; ++w) backends.push_back(oracles());

  parallel_for(images.size(), workers, [&](std::size_t i, std::size_t w) {
    const UniversalImage& item = images[i];
    OracleSession session(*backends[w], options.n_samples);
    Rng rng(options.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    const Image colorized = apply_filter(item.image, color, ColorMode::Integer);
    PerImage& r = results[i];
    for (std::size_t k = 0; k < options.n_samples; ++k) {
      const TransformParams t = sample_params(options.transforms, rng);
      const PipelineVerdict v = session.classify(apply_transforms(colorized, t));
      if (v.label != Label::Bonafide) continue;
      r.fooled = true;
      ++r.fooled_samples;
      r.quality_sum += v.quality;
      if (v.quality >= options.quality_threshold && v.match_id && *v.match_id == item.identity) r.passes = true;
    }
    r.queries = session.ledger().count();
  });

  UniversalScore score;
  std::size_t fooled_images = 0, passing = 0, fooled_samples = 0;
  double quality_sum = 0.0;
  for (const PerImage& r : results) {
    fooled_images += r.fooled ? 1 : 0;
    passing += r.passes ? 1 : 0;
    fooled_samples += r.fooled_samples;
    quality_sum += r.quality_sum;
    score.queries += r.queries;
  }
  const auto n = static_cast<double>(images.size());
  score.fr = static_cast<double>(fooled_images) / n;
  score.oasr = static_cast<double>(passing) / n;
  score.aqs = fooled_samples == 0 ? 0.0 : quality_sum / static_cast<double>(fooled_samples);
  return score;
}

}  // namespace chromafool
