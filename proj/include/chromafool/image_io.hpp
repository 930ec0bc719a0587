#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chromafool/image.hpp"

namespace chromafool {

// Loads an 8-bit RGB PNG or binary PPM (P6), detected by content. The result
// is in Integer mode.
//   NotFoundError      path does not exist
//   IoError            path exists but cannot be read
//   ChannelCountError  grayscale, gray+alpha or RGBA input
//   FormatError        anything else that is not a supported image
Image load_image(const std::filesystem::path& path);

// Writes PNG unless the extension is .ppm. Continuous-mode images are rounded
// to the nearest level first.
void save_image(const Image& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

// Single-channel 8-bit PNG of a grayscale raster (values rounded).
void save_gray_png(const GrayImage& img, const std::filesystem::path& path);

}  // namespace chromafool
