#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "chromafool/image.hpp"

namespace chromafool {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Sampling envelope of the physical-simulation transforms. Distances are in
// pixels at the working resolution, rotation in degrees.
struct TransformRanges {
  Interval illumination_coeff{0.0, 300.0};
  Interval illumination_center{25.0, 100.0};  // per axis
  Interval illumination_radius{25.0, 50.0};
  Interval brightness_coeff{0.2, 1.8};
  Interval gamma_coeff{1.0, 3.0};
  Interval translation{-10.0, 10.0};  // per axis
  Interval rotation{-60.0, 60.0};
  Interval crop{-20.0, 20.0};
  std::vector<int> gaussian_kernel{3, 5, 7};
  double illumination_probability = 0.5;

  // Throws InvalidArgument on inverted or non-finite intervals, an empty or
  // disallowed kernel set, or a probability outside [0, 1].
  void validate() const;
};

// One concrete draw from TransformRanges.
struct TransformParams {
  bool apply_illumination = false;
  double illumination_coeff = 0.0;
  double illumination_center_x = 0.0;
  double illumination_center_y = 0.0;
  double illumination_radius = 1.0;
  double brightness_coeff = 1.0;
  double gamma_coeff = 1.0;
  double translation_x = 0.0;
  double translation_y = 0.0;
  double rotation_deg = 0.0;
  double crop = 0.0;
  bool apply_blur = true;
  int gaussian_kernel = 3;

  // Parameters under which apply() returns its input unchanged.
  static TransformParams identity();
  bool operator==(const TransformParams&) const = default;
};

// Every channel value at distance d from center gains coeff * max(1 - d / radius, 0),
// clipped to [0, 255]. Throws on radius <= 0 or coeff < 0.
Image illuminate(const Image& img, double coeff, double center_x, double center_y, double radius);

// x <- clip(coeff * x, 0, 255). Throws on coeff < 0.
Image adjust_brightness(const Image& img, double coeff);

// x <- clip(255 * (x / 255)^(1 / gamma), 0, 255). Throws on gamma < 1.
Image gamma_correct(const Image& img, double gamma);

// Translation, rotation about the image center, then symmetric crop (negative
// values pad) resized back to the input size; realized as one inverse affine
// warp with bilinear sampling. Out-of-frame regions are black.
Image geo_transform(const Image& img, double translation_x, double translation_y, double rotation_deg,
                    double crop);

// Separable Gaussian, sigma = 0.3 * ((kernel - 1) / 2 - 1) + 0.8, replicate
// border. kernel must be 3, 5 or 7.
Image gaussian_blur(const Image& img, int kernel);
std::vector<double> gaussian_taps(int kernel);

// Illumination (iff flagged), brightness, gamma, geometric, blur (iff flagged).
Image apply_transforms(const Image& img, const TransformParams& params);

using Rng = std::mt19937_64;

// lo + (hi - lo) * u, u uniform in [0, 1); exact for degenerate intervals.
double uniform_in(Rng& rng, const Interval& iv);

TransformParams sample_params(const TransformRanges& ranges, Rng& rng);

// Owns its random stream; one instance per thread.
class TransformSampler {
 public:
  TransformSampler(TransformRanges ranges, std::uint64_t seed);
  TransformParams next() { return sample_params(ranges_, rng_); }
  const TransformRanges& ranges() const { return ranges_; }

 private:
  TransformRanges ranges_;
  Rng rng_;
};

}  // namespace chromafool
