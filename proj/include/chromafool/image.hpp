#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chromafool {

// Rasters smaller than this on either axis are rejected.
inline constexpr std::size_t kMinImageSide = 8;
// Attack-path images are processed at this square resolution.
inline constexpr std::size_t kWorkingSize = 256;

enum class Channel : std::size_t { R = 0, G = 1, B = 2 };

// Integer mode applies the floor of the colorization; Continuous keeps reals.
enum class ColorMode { Integer, Continuous };

// RGB raster, stored planar (all R, then all G, then all B), row-major planes.
// Every value lies in [0, 255]; in Integer mode every value is integral.
class Image {
 public:
  Image(std::size_t height, std::size_t width, ColorMode mode = ColorMode::Integer);

  // Interleaved 8-bit RGB, row-major, 3 * height * width bytes.
  static Image from_rgb8(std::size_t height, std::size_t width, std::span<const std::uint8_t> rgb);
  // Uniform image of one color.
  static Image filled(std::size_t height, std::size_t width, std::array<double, 3> rgb,
                      ColorMode mode = ColorMode::Continuous);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return height_ * width_; }
  ColorMode mode() const { return mode_; }
  void set_mode(ColorMode mode) { mode_ = mode; }

  std::span<double> plane(Channel c);
  std::span<const double> plane(Channel c) const;
  std::span<double> plane(std::size_t c) { return plane(static_cast<Channel>(c)); }
  std::span<const double> plane(std::size_t c) const { return plane(static_cast<Channel>(c)); }

  double at(Channel c, std::size_t y, std::size_t x) const { return plane(c)[y * width_ + x]; }
  double& at(Channel c, std::size_t y, std::size_t x) { return plane(c)[y * width_ + x]; }

  // Interleaved 8-bit RGB. Throws unless the image is in Integer mode.
  std::vector<std::uint8_t> to_rgb8() const;

  // Throws InvalidArgument if a value is outside [0, 255] or, in Integer mode,
  // not integral.
  void validate() const;

  bool operator==(const Image& other) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  ColorMode mode_;
  std::vector<double> data_;
};

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

struct ColorFilter {
  double r = 1.0;
  double g = 1.0;
  double b = 1.0;

  std::array<double, 3> as_array() const { return {r, g, b}; }
  static ColorFilter from_array(std::span<const double, 3> v) { return {v[0], v[1], v[2]}; }
  // Throws InvalidArgument unless each component is finite and in [0, 1].
  void validate() const;
  // 0.3 r + 0.59 g + 0.11 b: the factor by which filtering scales grayscale.
  double luminance() const { return 0.3 * r + 0.59 * g + 0.11 * b; }

  bool operator==(const ColorFilter&) const = default;
};

// gray = 0.3 R + 0.59 G + 0.11 B per pixel.
GrayImage grayscale(const Image& img);

// R_f = clip(r * gray, 0, 255), likewise G_f and B_f, where gray is taken from
// the input pixel. Integer mode floors each value.
Image apply_filter(const Image& img, const ColorFilter& filter, ColorMode mode);

// Bilinear resize (pixel-center aligned). The result keeps the source mode;
// Integer images are rounded to the nearest level.
Image resize_bilinear(const Image& img, std::size_t height, std::size_t width);

// Area-averaging resize for downscaling (exact box integration, fractional
// coverage at cell edges); falls back to bilinear on any upscaled axis.
// The operation is linear in the pixel values.
Image resize_area(const Image& img, std::size_t height, std::size_t width);
GrayImage resize_area(const GrayImage& img, std::size_t height, std::size_t width);

// Plane-level helpers shared by the resizers and the geometric transforms.
namespace detail {
void resize_plane_bilinear(std::span<const double> src, std::size_t sh, std::size_t sw,
                           std::span<double> dst, std::size_t dh, std::size_t dw);
void resize_plane_area(std::span<const double> src, std::size_t sh, std::size_t sw,
                       std::span<double> dst, std::size_t dh, std::size_t dw);
}  // namespace detail

}  // namespace chromafool
