// AVX2 variants of the kernels in scalar.cpp. Compiled with -mavx2 only;
// callers reach these through the dispatch table after a CPU feature check.
//
// The linear kernels perform the same operations in the same order as the
// scalar reference and therefore match it bit-for-bit. plane_stats and dot
// reassociate the reduction, and gamma uses a polynomial log2/exp2, so those
// agree with the reference only to rounding.

#include "chromafool/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace chromafool::kernels {
namespace {

inline __m256d clip255(__m256d v) {
  return _mm256_min_pd(_mm256_max_pd(v, _mm256_setzero_pd()), _mm256_set1_pd(255.0));
}

inline double clip255(double v) { return std::min(std::max(v, 0.0), 255.0); }

void grayscale(const double* r, const double* g, const double* b, double* out, std::size_t n) {
  const __m256d wr = _mm256_set1_pd(0.3);
  const __m256d wg = _mm256_set1_pd(0.59);
  const __m256d wb = _mm256_set1_pd(0.11);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_mul_pd(wr, _mm256_loadu_pd(r + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wg, _mm256_loadu_pd(g + i)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wb, _mm256_loadu_pd(b + i)));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) out[i] = 0.3 * r[i] + 0.59 * g[i] + 0.11 * b[i];
}

void scale_clip(const double* in, double k, double* out, std::size_t n) {
  const __m256d kk = _mm256_set1_pd(k);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, clip255(_mm256_mul_pd(kk, _mm256_loadu_pd(in + i))));
  }
  for (; i < n; ++i) out[i] = clip255(k * in[i]);
}

void scale_clip_floor(const double* in, double k, double* out, std::size_t n) {
  const __m256d kk = _mm256_set1_pd(k);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = clip255(_mm256_mul_pd(kk, _mm256_loadu_pd(in + i)));
    _mm256_storeu_pd(out + i, _mm256_floor_pd(v));
  }
  for (; i < n; ++i) out[i] = std::floor(clip255(k * in[i]));
}

void add_weighted_clip(double* io, const double* weight, double coeff, std::size_t n) {
  const __m256d c = _mm256_set1_pd(coeff);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(io + i), _mm256_mul_pd(c, _mm256_loadu_pd(weight + i)));
    _mm256_storeu_pd(io + i, clip255(v));
  }
  for (; i < n; ++i) io[i] = clip255(io[i] + coeff * weight[i]);
}

// log2 of strictly positive normal doubles.
inline __m256d log2_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  // Exponent as double via the 2^52 magic-number trick.
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // Fold m into [sqrt(1/2), sqrt(2)).
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  // atanh series: ln(m) = 2 (s + s^3/3 + s^5/5 + ...), |s| <= 0.1716.
  static constexpr double kInvOdd[] = {1.0 / 21, 1.0 / 19, 1.0 / 17, 1.0 / 15, 1.0 / 13, 1.0 / 11,
                                       1.0 / 9,  1.0 / 7,  1.0 / 5,  1.0 / 3,  1.0};
  __m256d p = _mm256_set1_pd(1.0 / 23.0);
  for (const double c : kInvOdd) p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(c));
  const __m256d ln_m = _mm256_mul_pd(_mm256_set1_pd(2.0), _mm256_mul_pd(s, p));
  return _mm256_add_pd(e, _mm256_mul_pd(ln_m, _mm256_set1_pd(1.4426950408889634)));
}

// 2^y for y in [-1000, 0].
inline __m256d exp2_pd(__m256d y) {
  y = _mm256_max_pd(y, _mm256_set1_pd(-1000.0));
  const __m256d n = _mm256_round_pd(y, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d f = _mm256_mul_pd(_mm256_sub_pd(y, n), _mm256_set1_pd(0.6931471805599453));
  // e^f, |f| <= 0.347
  static constexpr double kInvFact[] = {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
                                        1.0 / 40320.0,     1.0 / 5040.0,      1.0 / 720.0,     1.0 / 120.0,
                                        1.0 / 24.0,        1.0 / 6.0,         0.5,             1.0,
                                        1.0};
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  for (const double c : kInvFact) p = _mm256_add_pd(_mm256_mul_pd(p, f), _mm256_set1_pd(c));
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i scale_bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(scale_bits));
}

void gamma(double* io, double exponent, std::size_t n) {
  const __m256d inv255 = _mm256_set1_pd(1.0 / 255.0);
  const __m256d k255 = _mm256_set1_pd(255.0);
  const __m256d ex = _mm256_set1_pd(exponent);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d tiny = _mm256_set1_pd(1e-300);
  const auto one = [&](std::size_t at) {
    const __m256d v = _mm256_loadu_pd(io + at);
    const __m256d positive = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    const __m256d x = _mm256_max_pd(_mm256_mul_pd(v, inv255), tiny);
    const __m256d r = clip255(_mm256_mul_pd(k255, exp2_pd(_mm256_mul_pd(ex, log2_pd(x)))));
    _mm256_storeu_pd(io + at, _mm256_and_pd(r, positive));
  };
  std::size_t i = 0;
  // Four independent vectors per step hide the polynomial latency chains.
  for (; i + 16 <= n; i += 16) {
    one(i);
    one(i + 4);
    one(i + 8);
    one(i + 12);
  }
  for (; i + 4 <= n; i += 4) one(i);
  if (i < n) {
    // Pad the tail so it takes the vector formula too: the result of an
    // element never depends on its position.
    alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
    std::copy(io + i, io + n, tail);
    const __m256d v = _mm256_load_pd(tail);
    const __m256d positive = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    const __m256d x = _mm256_max_pd(_mm256_mul_pd(v, inv255), tiny);
    const __m256d r = clip255(_mm256_mul_pd(k255, exp2_pd(_mm256_mul_pd(ex, log2_pd(x)))));
    _mm256_store_pd(tail, _mm256_and_pd(r, positive));
    std::copy(tail, tail + (n - i), io + i);
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

PlaneStats plane_stats(const double* p, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  __m256i count = _mm256_setzero_si256();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d k255 = _mm256_set1_pd(255.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    acc = _mm256_add_pd(acc, v);
    const __m256d hit = _mm256_or_pd(_mm256_cmp_pd(v, zero, _CMP_EQ_OQ), _mm256_cmp_pd(v, k255, _CMP_EQ_OQ));
    // hit lanes are all-ones (-1 as int64)
    count = _mm256_sub_epi64(count, _mm256_castpd_si256(hit));
  }
  alignas(32) long long lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), count);
  PlaneStats s;
  s.sum = hsum(acc);
  s.extreme = static_cast<std::size_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    s.sum += p[i];
    if (p[i] == 0.0 || p[i] == 255.0) ++s.extreme;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void convolve_rows(const double* in, double* out, std::size_t height, std::size_t width,
                   const double* taps, std::size_t radius) {
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  auto scalar_at = [&](const double* row, std::ptrdiff_t x) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -r; k <= r; ++k) {
      acc += taps[k + r] * row[std::clamp<std::ptrdiff_t>(x + k, 0, w - 1)];
    }
    return acc;
  };
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = in + y * width;
    double* dst = out + y * width;
    std::ptrdiff_t x = 0;
    for (; x < std::min(r, w); ++x) dst[x] = scalar_at(row, x);
    // Independent accumulators keep several add chains in flight.
    for (; x + 16 <= w - r; x += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const __m256d t = _mm256_set1_pd(taps[k + r]);
        const double* p = row + x + k;
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(t, _mm256_loadu_pd(p)));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(t, _mm256_loadu_pd(p + 4)));
        a2 = _mm256_add_pd(a2, _mm256_mul_pd(t, _mm256_loadu_pd(p + 8)));
        a3 = _mm256_add_pd(a3, _mm256_mul_pd(t, _mm256_loadu_pd(p + 12)));
      }
      _mm256_storeu_pd(dst + x, a0);
      _mm256_storeu_pd(dst + x + 4, a1);
      _mm256_storeu_pd(dst + x + 8, a2);
      _mm256_storeu_pd(dst + x + 12, a3);
    }
    for (; x + 4 <= w - r; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k + r]), _mm256_loadu_pd(row + x + k)));
      }
      _mm256_storeu_pd(dst + x, acc);
    }
    for (; x < w; ++x) dst[x] = scalar_at(row, x);
  }
}

void convolve_cols(const double* in, double* out, std::size_t height, std::size_t width,
                   const double* taps, std::size_t radius) {
  const auto h = static_cast<std::ptrdiff_t>(height);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    double* dst = out + y * static_cast<std::ptrdiff_t>(width);
    std::size_t x = 0;
    for (; x + 16 <= width; x += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a3 = a0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + k, 0, h - 1);
        const double* src = in + yy * static_cast<std::ptrdiff_t>(width) + static_cast<std::ptrdiff_t>(x);
        const __m256d t = _mm256_set1_pd(taps[k + r]);
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(t, _mm256_loadu_pd(src)));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(t, _mm256_loadu_pd(src + 4)));
        a2 = _mm256_add_pd(a2, _mm256_mul_pd(t, _mm256_loadu_pd(src + 8)));
        a3 = _mm256_add_pd(a3, _mm256_mul_pd(t, _mm256_loadu_pd(src + 12)));
      }
      _mm256_storeu_pd(dst + x, a0);
      _mm256_storeu_pd(dst + x + 4, a1);
      _mm256_storeu_pd(dst + x + 8, a2);
      _mm256_storeu_pd(dst + x + 12, a3);
    }
    for (; x + 4 <= width; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + k, 0, h - 1);
        const double* src = in + yy * static_cast<std::ptrdiff_t>(width) + static_cast<std::ptrdiff_t>(x);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k + r]), _mm256_loadu_pd(src)));
      }
      _mm256_storeu_pd(dst + x, acc);
    }
    for (; x < width; ++x) {
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

const KernelTable& avx2_table_impl() {
  static const KernelTable table{
      "avx2",        grayscale,  scale_clip, scale_clip_floor, add_weighted_clip,
      gamma,         plane_stats, dot,       convolve_rows,    convolve_cols,
  };
  return table;
}

}  // namespace chromafool::kernels
