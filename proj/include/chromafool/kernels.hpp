#pragma once

// Data-parallel inner loops shared by the image, transform, oracle and
// defense code. Every kernel has a scalar reference implementation; SIMD
// variants are selected at runtime and are equivalence-tested against it.
//
// All kernels operate on contiguous planes of doubles holding intensities in
// [0, 255].

#include <cstddef>
#include <string_view>

namespace chromafool::kernels {

struct PlaneStats {
  double sum = 0.0;
  std::size_t extreme = 0;  // values exactly 0 or exactly 255
};

struct KernelTable {
  std::string_view name;

  // out = 0.3 r + 0.59 g + 0.11 b, evaluated left to right.
  void (*grayscale)(const double* r, const double* g, const double* b, double* out, std::size_t n);
  // out = clip(k * in, 0, 255)
  void (*scale_clip)(const double* in, double k, double* out, std::size_t n);
  // out = floor(clip(k * in, 0, 255))
  void (*scale_clip_floor)(const double* in, double k, double* out, std::size_t n);
  // io = clip(io + coeff * weight, 0, 255)
  void (*add_weighted_clip)(double* io, const double* weight, double coeff, std::size_t n);
  // io = clip(255 * (io / 255)^exponent, 0, 255); exponent in (0, 1]
  void (*gamma)(double* io, double exponent, std::size_t n);
  PlaneStats (*plane_stats)(const double* p, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // Horizontal / vertical 1-D convolution with replicate border.
  // taps has 2 * radius + 1 entries.
  void (*convolve_rows)(const double* in, double* out, std::size_t height, std::size_t width,
                        const double* taps, std::size_t radius);
  void (*convolve_cols)(const double* in, double* out, std::size_t height, std::size_t width,
                        const double* taps, std::size_t radius);
};

enum class Isa { Scalar, Avx2 };

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_table();

// Table used by the library. Defaults to the best variant the CPU supports.
const KernelTable& active();
// Overrides the runtime choice (tests, benchmarking). Returns false when the
// requested ISA is unavailable, in which case nothing changes.
bool select(Isa isa);
Isa active_isa();

}  // namespace chromafool::kernels
