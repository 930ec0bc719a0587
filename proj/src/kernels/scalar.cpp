#include "chromafool/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace chromafool::kernels {
namespace {

inline double clip255(double v) { return std::min(std::max(v, 0.0), 255.0); }

void grayscale(const double* r, const double* g, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 0.3 * r[i] + 0.59 * g[i] + 0.11 * b[i];
  }
}

void scale_clip(const double* in, double k, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = clip255(k * in[i]);
}

void scale_clip_floor(const double* in, double k, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::floor(clip255(k * in[i]));
}

void add_weighted_clip(double* io, const double* weight, double coeff, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) io[i] = clip255(io[i] + coeff * weight[i]);
}

void gamma(double* io, double exponent, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = io[i];
    io[i] = v <= 0.0 ? 0.0 : clip255(255.0 * std::pow(v / 255.0, exponent));
  }
}

PlaneStats plane_stats(const double* p, std::size_t n) {
  PlaneStats s;
  for (std::size_t i = 0; i < n; ++i) {
    s.sum += p[i];
    if (p[i] == 0.0 || p[i] == 255.0) ++s.extreme;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void convolve_rows(const double* in, double* out, std::size_t height, std::size_t width,
                   const double* taps, std::size_t radius) {
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width;
    double* dst = out + y * width;
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t xx = std::clamp<std::ptrdiff_t>(x + k, 0, w - 1);
        acc += taps[k + r] * row[xx];
      }
      dst[x] = acc;
    }
  }
}

void convolve_cols(const double* in, double* out, std::size_t height, std::size_t width,
                   const double* taps, std::size_t radius) {
  const auto h = static_cast<std::ptrdiff_t>(height);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    double* dst = out + y * static_cast<std::ptrdiff_t>(width);
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + k, 0, h - 1);
        acc += taps[k + r] * in[yy * static_cast<std::ptrdiff_t>(width) + static_cast<std::ptrdiff_t>(x)];
      }
      dst[x] = acc;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",      grayscale,  scale_clip, scale_clip_floor, add_weighted_clip,
      gamma,         plane_stats, dot,       convolve_rows,    convolve_cols,
  };
  return table;
}

}  // namespace chromafool::kernels
