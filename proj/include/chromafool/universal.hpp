#pragma once

// Universal colors: cluster the filters that individual attacks converged to
// and measure how well each cluster center fools unseen images.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"
#include "chromafool/transforms.hpp"

namespace chromafool {

struct ColorCluster {
  ColorFilter center;
  std::size_t member_count = 0;
  std::vector<std::string> member_ids;
};

struct ClusterOptions {
  std::size_t k = 3;
  std::size_t restarts = 50;
  std::size_t max_lloyd_iterations = 100;
  std::uint64_t seed = 0;
};

// k-means with k-means++ seeding; the restart with the lowest within-cluster
// sum of squares wins. Clusters come back ordered by descending member count,
// ties by lexicographic center, so index 0 is Color ID 1. Empty clusters are
// reported with member_count 0. Throws if there are fewer filters than k.
std::vector<ColorCluster> cluster_filters(std::span<const ColorFilter> filters, std::span<const std::string> ids,
                                          const ClusterOptions& options);

double within_cluster_ss(std::span<const ColorFilter> filters, std::span<const ColorFilter> centers);

struct UniversalImage {
  std::string id;
  std::string identity;
  Image image;
};

struct UniversalScore {
  double fr = 0.0;    // images with at least one fooled sample
  double aqs = 0.0;   // mean quality over all fooled samples
  double oasr = 0.0;  // images with a fooled sample passing quality and identity
  std::uint64_t queries = 0;
};

struct UniversalEvalOptions {
  TransformRanges transforms;
  std::size_t n_samples = 10;
  double quality_threshold = 0.3;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Colorizes every image with the fixed color and queries n_samples transform
// draws of each: exactly n_samples * |images| queries.
UniversalScore evaluate_universal(const ColorFilter& color, std::span<const UniversalImage> images,
                                  const OracleFactory& oracles, const UniversalEvalOptions& options);

}  // namespace chromafool
