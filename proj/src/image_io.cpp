#include "chromafool/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "chromafool/errors.hpp"

namespace chromafool {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw NotFoundError("no such file: " + path.string());
  if (std::filesystem::is_directory(path, ec)) throw IoError(path.string() + " is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image quantized(const Image& img) {
  if (img.mode() == ColorMode::Integer) return img;
  Image out(img.height(), img.width(), ColorMode::Integer);
  for (std::size_t c = 0; c < 3; ++c) {
    std::ranges::transform(img.plane(c), out.plane(c).begin(),
                           [](double v) { return std::clamp(std::round(v), 0.0, 255.0); });
  }
  return out;
}

// Parses a PPM/PGM header token, skipping whitespace and comments.
bool next_token(std::span<const std::uint8_t> bytes, std::size_t& pos, std::string& token) {
  token.clear();
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
  return !token.empty();
}

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  const bool gray = bytes[1] == '5';
  std::string w, h, maxval;
  if (!next_token(bytes, pos, w) || !next_token(bytes, pos, h) || !next_token(bytes, pos, maxval)) {
    throw FormatError("truncated PNM header");
  }
  if (gray) throw ChannelCountError("PGM input has 1 channel, expected 3");
  std::size_t width = 0, height = 0;
  try {
    width = std::stoul(w);
    height = std::stoul(h);
    if (std::stoul(maxval) != 255) throw FormatError("only 8-bit PPM is supported");
  } catch (const std::logic_error&) {
    throw FormatError("malformed PPM header");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t need = 3 * width * height;
  if (bytes.size() < pos + need) throw FormatError("truncated PPM pixel data");
  return Image::from_rgb8(height, width, bytes.subspan(pos, need));
}

}  // namespace

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG decode failed: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  if (!color || alpha) {
    const int channels = (color ? 3 : 1) + (alpha ? 1 : 0);
    png_image_free(&image);
    throw ChannelCountError("PNG input has " + std::to_string(channels) + " channels, expected 3");
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG decode failed: ") + image.message);
  }
  return Image::from_rgb8(image.height, image.width, rgb);
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  const Image q = quantized(img);
  const std::vector<std::uint8_t> rgb = q.to_rgb8();
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(q.width());
  image.height = static_cast<png_uint_32>(q.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return decode_pnm(bytes);
  }
  throw FormatError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".ppm") {
    const Image q = quantized(img);
    std::ostringstream header;
    header << "P6\n" << q.width() << ' ' << q.height() << "\n255\n";
    const std::string h = header.str();
    std::vector<std::uint8_t> bytes(h.begin(), h.end());
    const auto rgb = q.to_rgb8();
    bytes.insert(bytes.end(), rgb.begin(), rgb.end());
    write_file(path, bytes);
    return;
  }
  write_file(path, encode_png(img));
}

void save_gray_png(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels(img.values.size());
  std::ranges::transform(img.values, pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  });
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  write_file(path, out);
}

}  // namespace chromafool
