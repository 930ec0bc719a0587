#include "chromafool/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chromafool/errors.hpp"
#include "chromafool/kernels.hpp"

namespace chromafool {
namespace {

void check_interval(const Interval& iv, const char* name) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
    throw InvalidArgument(std::string("invalid transform range: ") + name);
  }
}

Image continuous_copy(const Image& img) {
  Image out = img;
  out.set_mode(ColorMode::Continuous);
  return out;
}

void illuminate_in_place(Image& img, double coeff, double cx, double cy, double radius) {
  const auto& k = kernels::active();
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cy - radius)));
  const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(h - 1, static_cast<std::ptrdiff_t>(std::ceil(cy + radius)));
  const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cx - radius)));
  const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w - 1, static_cast<std::ptrdiff_t>(std::ceil(cx + radius)));
  if (y0 > y1 || x0 > x1) return;
  const auto span = static_cast<std::size_t>(x1 - x0 + 1);
  std::vector<double> weight(span);
  for (std::ptrdiff_t y = y0; y <= y1; ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::ptrdiff_t x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) - cx;
      weight[static_cast<std::size_t>(x - x0)] = std::max(1.0 - std::sqrt(dx * dx + dy * dy) / radius, 0.0);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      double* row = img.plane(c).data() + y * w + x0;
      k.add_weighted_clip(row, weight.data(), coeff, span);
    }
  }
}

void brightness_in_place(Image& img, double coeff) {
  const auto& k = kernels::active();
  for (std::size_t c = 0; c < 3; ++c) {
    auto p = img.plane(c);
    k.scale_clip(p.data(), coeff, p.data(), p.size());
  }
}

void gamma_in_place(Image& img, double gamma) {
  if (gamma == 1.0) return;
  const auto& k = kernels::active();
  for (std::size_t c = 0; c < 3; ++c) {
    auto p = img.plane(c);
    k.gamma(p.data(), 1.0 / gamma, p.size());
  }
}

}  // namespace

void TransformRanges::validate() const {
  check_interval(illumination_coeff, "illumination_coeff");
  check_interval(illumination_center, "illumination_center");
  check_interval(illumination_radius, "illumination_radius");
  check_interval(brightness_coeff, "brightness_coeff");
  check_interval(gamma_coeff, "gamma_coeff");
  check_interval(translation, "translation");
  check_interval(rotation, "rotation");
  check_interval(crop, "crop");
  if (illumination_coeff.lo < 0.0) throw InvalidArgument("illumination_coeff must be non-negative");
  if (illumination_radius.lo <= 0.0) throw InvalidArgument("illumination_radius must be positive");
  if (brightness_coeff.lo < 0.0) throw InvalidArgument("brightness_coeff must be non-negative");
  if (gamma_coeff.lo < 1.0) throw InvalidArgument("gamma_coeff must be >= 1");
  if (gaussian_kernel.empty()) throw InvalidArgument("gaussian_kernel set is empty");
  for (const int k : gaussian_kernel) {
    if (k != 3 && k != 5 && k != 7) throw InvalidArgument("gaussian_kernel entries must be 3, 5 or 7");
  }
  if (!(illumination_probability >= 0.0 && illumination_probability <= 1.0)) {
    throw InvalidArgument("illumination_probability must be in [0, 1]");
  }
}

TransformParams TransformParams::identity() {
  TransformParams p;
  p.apply_illumination = false;
  p.apply_blur = false;
  return p;
}

Image illuminate(const Image& img, double coeff, double center_x, double center_y, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("illumination radius must be positive");
  if (!(coeff >= 0.0)) throw InvalidArgument("illumination coefficient must be non-negative");
  Image out = continuous_copy(img);
  illuminate_in_place(out, coeff, center_x, center_y, radius);
  return out;
}

Image adjust_brightness(const Image& img, double coeff) {
  if (!(coeff >= 0.0)) throw InvalidArgument("brightness coefficient must be non-negative");
  Image out = continuous_copy(img);
  brightness_in_place(out, coeff);
  return out;
}

Image gamma_correct(const Image& img, double gamma) {
  if (!(gamma >= 1.0)) throw InvalidArgument("gamma must be >= 1");
  Image out = continuous_copy(img);
  gamma_in_place(out, gamma);
  return out;
}

Image geo_transform(const Image& img, double translation_x, double translation_y, double rotation_deg,
                    double crop) {
  if (translation_x == 0.0 && translation_y == 0.0 && rotation_deg == 0.0 && crop == 0.0) {
    return continuous_copy(img);
  }
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  // Cropping c pixels per side and resizing back magnifies about the center.
  const double zoom_x = static_cast<double>(w) / (static_cast<double>(w) - 2.0 * crop);
  const double zoom_y = static_cast<double>(h) / (static_cast<double>(h) - 2.0 * crop);
  const double theta = rotation_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  Image out(h, w, ColorMode::Continuous);
  const auto hi = static_cast<std::ptrdiff_t>(h);
  const auto wi = static_cast<std::ptrdiff_t>(w);
  std::array<std::span<const double>, 3> src{img.plane(0), img.plane(1), img.plane(2)};
  std::array<std::span<double>, 3> dst{out.plane(0), out.plane(1), out.plane(2)};

  const double* __restrict s0 = src[0].data();
  const double* __restrict s1 = src[1].data();
  const double* __restrict s2 = src[2].data();
  double* __restrict d0 = dst[0].data();
  double* __restrict d1 = dst[1].data();
  double* __restrict d2 = dst[2].data();
  std::vector<double> ux(w);
  for (std::size_t x = 0; x < w; ++x) ux[x] = (static_cast<double>(x) - cx) / zoom_x;
  // floor() for values in (-1, n): truncation is exact except on (-1, 0).
  const auto floor_in_frame = [](double v) { return v < 0.0 ? std::ptrdiff_t{-1} : static_cast<std::ptrdiff_t>(v); };
  for (std::size_t y = 0; y < h; ++y) {
    const double uy = (static_cast<double>(y) - cy) / zoom_y;
    const double sin_uy = sin_t * uy;
    const double cos_uy = cos_t * uy;
    for (std::size_t x = 0; x < w; ++x) {
      // Undo crop zoom, then rotation, then translation.
      const double rx = cos_t * ux[x] + sin_uy + cx;
      const double ry = -sin_t * ux[x] + cos_uy + cy;
      const double sx = rx - translation_x;
      const double sy = ry - translation_y;
      if (sx <= -1.0 || sy <= -1.0 || sx >= static_cast<double>(w) || sy >= static_cast<double>(h)) continue;
      const auto x0 = floor_in_frame(sx);
      const auto y0 = floor_in_frame(sy);
      const double ax = sx - static_cast<double>(x0);
      const double ay = sy - static_cast<double>(y0);
      const double w00 = (1.0 - ax) * (1.0 - ay);
      const double w01 = ax * (1.0 - ay);
      const double w10 = (1.0 - ax) * ay;
      const double w11 = ax * ay;
      const std::size_t o = y * w + x;
      if (x0 >= 0 && y0 >= 0 && x0 + 1 < wi && y0 + 1 < hi) {
        const auto i = static_cast<std::size_t>(y0 * wi + x0);
        const std::size_t j = i + w;
        d0[o] = std::clamp(w00 * s0[i] + w01 * s0[i + 1] + w10 * s0[j] + w11 * s0[j + 1], 0.0, 255.0);
        d1[o] = std::clamp(w00 * s1[i] + w01 * s1[i + 1] + w10 * s1[j] + w11 * s1[j + 1], 0.0, 255.0);
        d2[o] = std::clamp(w00 * s2[i] + w01 * s2[i + 1] + w10 * s2[j] + w11 * s2[j + 1], 0.0, 255.0);
        continue;
      }
      // Border pixels: taps outside the frame read black.
      const bool in_x0 = x0 >= 0 && x0 < wi;
      const bool in_x1 = x0 + 1 >= 0 && x0 + 1 < wi;
      const bool in_y0 = y0 >= 0 && y0 < hi;
      const bool in_y1 = y0 + 1 >= 0 && y0 + 1 < hi;
      for (std::size_t c = 0; c < 3; ++c) {
        const auto& sp = src[c];
        double v = 0.0;
        if (in_y0 && in_x0) v += w00 * sp[static_cast<std::size_t>(y0 * wi + x0)];
        if (in_y0 && in_x1) v += w01 * sp[static_cast<std::size_t>(y0 * wi + x0 + 1)];
        if (in_y1 && in_x0) v += w10 * sp[static_cast<std::size_t>((y0 + 1) * wi + x0)];
        if (in_y1 && in_x1) v += w11 * sp[static_cast<std::size_t>((y0 + 1) * wi + x0 + 1)];
        dst[c][o] = std::clamp(v, 0.0, 255.0);
      }
    }
  }
  return out;
}

std::vector<double> gaussian_taps(int kernel) {
  if (kernel != 3 && kernel != 5 && kernel != 7) {
    throw InvalidArgument("gaussian kernel size must be 3, 5 or 7");
  }
  const int radius = (kernel - 1) / 2;
  const double sigma = 0.3 * ((kernel - 1) * 0.5 - 1.0) + 0.8;
  std::vector<double> taps(static_cast<std::size_t>(kernel));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

Image gaussian_blur(const Image& img, int kernel) {
  const auto taps = gaussian_taps(kernel);
  const auto radius = static_cast<std::size_t>((kernel - 1) / 2);
  const auto& k = kernels::active();
  Image out(img.height(), img.width(), ColorMode::Continuous);
  std::vector<double> tmp(img.pixel_count());
  for (std::size_t c = 0; c < 3; ++c) {
    k.convolve_rows(img.plane(c).data(), tmp.data(), img.height(), img.width(), taps.data(), radius);
    auto dst = out.plane(c);
    k.convolve_cols(tmp.data(), dst.data(), img.height(), img.width(), taps.data(), radius);
    // Normalized taps can overshoot 255 by an ulp.
    for (double& v : dst) v = std::clamp(v, 0.0, 255.0);
  }
  return out;
}

namespace {

void check_params(const TransformParams& p) {
  if (p.apply_illumination) {
    if (!(p.illumination_radius > 0.0)) throw InvalidArgument("illumination radius must be positive");
    if (!(p.illumination_coeff >= 0.0)) throw InvalidArgument("illumination coefficient must be non-negative");
  }
  if (!(p.brightness_coeff >= 0.0)) throw InvalidArgument("brightness coefficient must be non-negative");
  if (!(p.gamma_coeff >= 1.0)) throw InvalidArgument("gamma must be >= 1");
}

void pointwise_stages(Image& img, const TransformParams& p) {
  if (p.apply_illumination) {
    illuminate_in_place(img, p.illumination_coeff, p.illumination_center_x, p.illumination_center_y,
                        p.illumination_radius);
  }
  if (p.brightness_coeff != 1.0) brightness_in_place(img, p.brightness_coeff);
  gamma_in_place(img, p.gamma_coeff);
}

// Integer-valued input takes at most 256 distinct values, so brightness and
// gamma reduce to a table built with the same kernels. Only the illuminated
// box, whose values stop being integral, goes through the kernels directly.
// Every element sees the same operations as in pointwise_stages.
Image pointwise_stages_integer(const Image& img, const TransformParams& p) {
  const auto& k = kernels::active();
  std::array<double, 256> lut;
  for (std::size_t v = 0; v < lut.size(); ++v) lut[v] = static_cast<double>(v);
  if (p.brightness_coeff != 1.0) k.scale_clip(lut.data(), p.brightness_coeff, lut.data(), lut.size());
  if (p.gamma_coeff != 1.0) k.gamma(lut.data(), 1.0 / p.gamma_coeff, lut.size());

  Image out(img.height(), img.width(), ColorMode::Continuous);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[static_cast<unsigned>(static_cast<int>(src[i]))];
  }
  if (!p.apply_illumination) return out;

  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const double cx = p.illumination_center_x, cy = p.illumination_center_y, radius = p.illumination_radius;
  const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cy - radius)));
  const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(h - 1, static_cast<std::ptrdiff_t>(std::ceil(cy + radius)));
  const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cx - radius)));
  const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w - 1, static_cast<std::ptrdiff_t>(std::ceil(cx + radius)));
  if (y0 > y1 || x0 > x1) return out;
  const auto span = static_cast<std::size_t>(x1 - x0 + 1);
  std::vector<double> weight(span), row(span);
  for (std::ptrdiff_t y = y0; y <= y1; ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::ptrdiff_t x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) - cx;
      weight[static_cast<std::size_t>(x - x0)] = std::max(1.0 - std::sqrt(dx * dx + dy * dy) / radius, 0.0);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const double* src = img.plane(c).data() + y * w + x0;
      std::copy(src, src + span, row.begin());
      k.add_weighted_clip(row.data(), weight.data(), p.illumination_coeff, span);
      if (p.brightness_coeff != 1.0) k.scale_clip(row.data(), p.brightness_coeff, row.data(), span);
      if (p.gamma_coeff != 1.0) k.gamma(row.data(), 1.0 / p.gamma_coeff, span);
      std::copy(row.begin(), row.end(), out.plane(c).data() + y * w + x0);
    }
  }
  return out;
}

}  // namespace

Image apply_transforms(const Image& img, const TransformParams& p) {
  check_params(p);
  Image out = img.mode() == ColorMode::Integer ? pointwise_stages_integer(img, p) : continuous_copy(img);
  if (img.mode() != ColorMode::Integer) pointwise_stages(out, p);
  out = geo_transform(out, p.translation_x, p.translation_y, p.rotation_deg, p.crop);
  if (p.apply_blur) out = gaussian_blur(out, p.gaussian_kernel);
  return out;
}

double uniform_in(Rng& rng, const Interval& iv) {
  const double u = std::generate_canonical<double, 53>(rng);
  return std::min(iv.lo + (iv.hi - iv.lo) * u, iv.hi);
}

TransformParams sample_params(const TransformRanges& ranges, Rng& rng) {
  TransformParams p;
  p.apply_illumination = std::generate_canonical<double, 53>(rng) < ranges.illumination_probability;
  p.illumination_coeff = uniform_in(rng, ranges.illumination_coeff);
  p.illumination_center_x = uniform_in(rng, ranges.illumination_center);
  p.illumination_center_y = uniform_in(rng, ranges.illumination_center);
  p.illumination_radius = uniform_in(rng, ranges.illumination_radius);
  p.brightness_coeff = uniform_in(rng, ranges.brightness_coeff);
  p.gamma_coeff = uniform_in(rng, ranges.gamma_coeff);
  p.translation_x = uniform_in(rng, ranges.translation);
  p.translation_y = uniform_in(rng, ranges.translation);
  p.rotation_deg = uniform_in(rng, ranges.rotation);
  p.crop = uniform_in(rng, ranges.crop);
  p.apply_blur = true;
  std::uniform_int_distribution<std::size_t> pick(0, ranges.gaussian_kernel.size() - 1);
  p.gaussian_kernel = ranges.gaussian_kernel[pick(rng)];
  return p;
}

TransformSampler::TransformSampler(TransformRanges ranges, std::uint64_t seed)
    : ranges_(std::move(ranges)), rng_(seed) {
  ranges_.validate();
}

}  // namespace chromafool
