#include "chromafool/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chromafool/errors.hpp"
#include "chromafool/kernels.hpp"

namespace chromafool {

Image::Image(std::size_t height, std::size_t width, ColorMode mode)
    : height_(height), width_(width), mode_(mode) {
  if (height < kMinImageSide || width < kMinImageSide) {
    throw InvalidArgument("image must be at least " + std::to_string(kMinImageSide) + "x" +
                          std::to_string(kMinImageSide) + ", got " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  data_.assign(3 * height * width, 0.0);
}

Image Image::from_rgb8(std::size_t height, std::size_t width, std::span<const std::uint8_t> rgb) {
  Image img(height, width, ColorMode::Integer);
  const std::size_t n = img.pixel_count();
  if (rgb.size() != 3 * n) throw InvalidArgument("rgb buffer size does not match image dimensions");
  for (std::size_t c = 0; c < 3; ++c) {
    auto p = img.plane(c);
    for (std::size_t i = 0; i < n; ++i) p[i] = rgb[3 * i + c];
  }
  return img;
}

Image Image::filled(std::size_t height, std::size_t width, std::array<double, 3> rgb, ColorMode mode) {
  Image img(height, width, mode);
  for (std::size_t c = 0; c < 3; ++c) std::ranges::fill(img.plane(c), rgb[c]);
  img.validate();
  return img;
}

std::span<double> Image::plane(Channel c) {
  const std::size_t n = pixel_count();
  return {data_.data() + static_cast<std::size_t>(c) * n, n};
}

std::span<const double> Image::plane(Channel c) const {
  const std::size_t n = pixel_count();
  return {data_.data() + static_cast<std::size_t>(c) * n, n};
}

std::vector<std::uint8_t> Image::to_rgb8() const {
  if (mode_ != ColorMode::Integer) throw InvalidArgument("to_rgb8 requires an Integer-mode image");
  const std::size_t n = pixel_count();
  std::vector<std::uint8_t> out(3 * n);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto p = plane(c);
    for (std::size_t i = 0; i < n; ++i) out[3 * i + c] = static_cast<std::uint8_t>(p[i]);
  }
  return out;
}

void Image::validate() const {
  for (const double v : data_) {
    if (!(v >= 0.0 && v <= 255.0)) throw InvalidArgument("pixel value outside [0, 255]");
    if (mode_ == ColorMode::Integer && v != std::floor(v)) {
      throw InvalidArgument("non-integral pixel value in Integer-mode image");
    }
  }
}

void ColorFilter::validate() const {
  for (const double v : {r, g, b}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidArgument("color filter component outside [0, 1]");
    }
  }
}

GrayImage grayscale(const Image& img) {
  GrayImage out{img.height(), img.width(), std::vector<double>(img.pixel_count())};
  kernels::active().grayscale(img.plane(Channel::R).data(), img.plane(Channel::G).data(),
                              img.plane(Channel::B).data(), out.values.data(), img.pixel_count());
  return out;
}

Image apply_filter(const Image& img, const ColorFilter& filter, ColorMode mode) {
  filter.validate();
  const auto& k = kernels::active();
  const GrayImage gray = grayscale(img);
  Image out(img.height(), img.width(), mode);
  const auto coeff = filter.as_array();
  for (std::size_t c = 0; c < 3; ++c) {
    auto dst = out.plane(c);
    if (mode == ColorMode::Integer) {
      k.scale_clip_floor(gray.values.data(), coeff[c], dst.data(), dst.size());
    } else {
      k.scale_clip(gray.values.data(), coeff[c], dst.data(), dst.size());
    }
  }
  return out;
}

namespace detail {

void resize_plane_bilinear(std::span<const double> src, std::size_t sh, std::size_t sw,
                           std::span<double> dst, std::size_t dh, std::size_t dw) {
  const double sy = static_cast<double>(sh) / static_cast<double>(dh);
  const double sx = static_cast<double>(sw) / static_cast<double>(dw);
  for (std::size_t y = 0; y < dh; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(sh - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, sh - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < dw; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(sw - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, sw - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = src[y0 * sw + x0] * (1.0 - wx) + src[y0 * sw + x1] * wx;
      const double bot = src[y1 * sw + x0] * (1.0 - wx) + src[y1 * sw + x1] * wx;
      dst[y * dw + x] = top * (1.0 - wy) + bot * wy;
    }
  }
}

namespace {

struct Tap {
  std::size_t index;
  double weight;
};

// For each output cell, the source samples it covers and their area weights.
std::vector<std::vector<Tap>> box_taps(std::size_t src, std::size_t dst) {
  std::vector<std::vector<Tap>> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double lo = static_cast<double>(i) * scale;
    const double hi = static_cast<double>(i + 1) * scale;
    for (auto j = static_cast<std::size_t>(lo); j < src && static_cast<double>(j) < hi; ++j) {
      const double overlap = std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
      if (overlap > 0.0) taps[i].push_back({j, overlap / scale});
    }
  }
  return taps;
}

}  // namespace

void resize_plane_area(std::span<const double> src, std::size_t sh, std::size_t sw,
                       std::span<double> dst, std::size_t dh, std::size_t dw) {
  if (dh > sh || dw > sw) {
    resize_plane_bilinear(src, sh, sw, dst, dh, dw);
    return;
  }
  const auto ty = box_taps(sh, dh);
  const auto tx = box_taps(sw, dw);
  std::vector<double> rows(sh * dw);
  for (std::size_t y = 0; y < sh; ++y) {
    for (std::size_t x = 0; x < dw; ++x) {
      double acc = 0.0;
      for (const Tap& t : tx[x]) acc += t.weight * src[y * sw + t.index];
      rows[y * dw + x] = acc;
    }
  }
  for (std::size_t y = 0; y < dh; ++y) {
    for (std::size_t x = 0; x < dw; ++x) {
      double acc = 0.0;
      for (const Tap& t : ty[y]) acc += t.weight * rows[t.index * dw + x];
      dst[y * dw + x] = std::clamp(acc, 0.0, 255.0);
    }
  }
}

}  // namespace detail

Image resize_bilinear(const Image& img, std::size_t height, std::size_t width) {
  if (height == img.height() && width == img.width()) return img;
  Image out(height, width, img.mode());
  for (std::size_t c = 0; c < 3; ++c) {
    detail::resize_plane_bilinear(img.plane(c), img.height(), img.width(), out.plane(c), height, width);
    if (img.mode() == ColorMode::Integer) {
      for (double& v : out.plane(c)) v = std::clamp(std::round(v), 0.0, 255.0);
    }
  }
  return out;
}

Image resize_area(const Image& img, std::size_t height, std::size_t width) {
  if (height == img.height() && width == img.width()) return img;
  Image out(height, width, ColorMode::Continuous);
  for (std::size_t c = 0; c < 3; ++c) {
    detail::resize_plane_area(img.plane(c), img.height(), img.width(), out.plane(c), height, width);
  }
  return out;
}

GrayImage resize_area(const GrayImage& img, std::size_t height, std::size_t width) {
  if (height == img.height && width == img.width) return img;
  GrayImage out{height, width, std::vector<double>(height * width)};
  detail::resize_plane_area(img.values, img.height, img.width, out.values, height, width);
  return out;
}

}  // namespace chromafool
