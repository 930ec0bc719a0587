#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/kernels.hpp"
#include "chromafool/transforms.hpp"

using namespace chromafool;
namespace k = chromafool::kernels;

namespace {

std::vector<double> random_plane(std::size_t n, std::mt19937_64& rng, bool integral = false) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> v(n);
  for (double& x : v) x = integral ? std::floor(u(rng)) : u(rng);
  // Exercise the clip boundaries too.
  if (n > 2) {
    v[0] = 0.0;
    v[n - 1] = 255.0;
  }
  return v;
}

const std::vector<std::size_t> kSizes{1, 3, 4, 5, 15, 16, 17, 63, 257, 1024};

struct Avx2Guard {
  ~Avx2Guard() { k::select(k::Isa::Avx2); }
};

}  // namespace

TEST_CASE("dispatch reports and switches the active table") {
  const k::Isa initial = k::active_isa();
  CHECK(k::select(k::Isa::Scalar));
  CHECK(k::active_isa() == k::Isa::Scalar);
  CHECK(k::active().name == k::scalar_table().name);
  if (k::avx2_table() != nullptr) {
    CHECK(k::select(k::Isa::Avx2));
    CHECK(k::active_isa() == k::Isa::Avx2);
  } else {
    CHECK_FALSE(k::select(k::Isa::Avx2));
  }
  k::select(initial);
}

TEST_CASE("scalar reference kernels compute their definitions") {
  const auto& s = k::scalar_table();
  std::vector<double> r{255, 0, 0, 100}, g{0, 255, 0, 100}, b{0, 0, 255, 100}, out(4);
  s.grayscale(r.data(), g.data(), b.data(), out.data(), 4);
  CHECK(out[0] == doctest::Approx(76.5).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(150.45).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(28.05).epsilon(1e-12));
  CHECK(out[3] == doctest::Approx(100.0).epsilon(1e-12));

  std::vector<double> in{10, 200, 101}, o(3);
  s.scale_clip(in.data(), 2.0, o.data(), 3);
  CHECK(o == std::vector<double>{20, 255, 202});
  s.scale_clip_floor(in.data(), 0.5, o.data(), 3);
  CHECK(o == std::vector<double>{5, 100, 50});

  std::vector<double> io{63.75, 0.0, 255.0};
  s.gamma(io.data(), 0.5, 3);
  CHECK(io[0] == doctest::Approx(127.5).epsilon(1e-12));
  CHECK(io[1] == 0.0);
  CHECK(io[2] == 255.0);

  std::vector<double> p{0, 255, 3, 4};
  const auto st = s.plane_stats(p.data(), 4);
  CHECK(st.sum == 262.0);
  CHECK(st.extreme == 2);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const k::KernelTable* v = k::avx2_table();
  if (v == nullptr) {
    MESSAGE("AVX2 not available, skipping equivalence checks");
    return;
  }
  const auto& s = k::scalar_table();
  std::mt19937_64 rng(42);

  SUBCASE("linear kernels match bit for bit") {
    for (const std::size_t n : kSizes) {
      const auto r = random_plane(n, rng), g = random_plane(n, rng), b = random_plane(n, rng);
      std::vector<double> o1(n), o2(n);
      s.grayscale(r.data(), g.data(), b.data(), o1.data(), n);
      v->grayscale(r.data(), g.data(), b.data(), o2.data(), n);
      CHECK(o1 == o2);
      for (const double kk : {0.0, 0.37, 1.0, 1.8}) {
        s.scale_clip(r.data(), kk, o1.data(), n);
        v->scale_clip(r.data(), kk, o2.data(), n);
        CHECK(o1 == o2);
        s.scale_clip_floor(r.data(), kk, o1.data(), n);
        v->scale_clip_floor(r.data(), kk, o2.data(), n);
        CHECK(o1 == o2);
      }
      auto io1 = r, io2 = r;
      const auto w = random_plane(n, rng);
      s.add_weighted_clip(io1.data(), w.data(), 1.3, n);
      v->add_weighted_clip(io2.data(), w.data(), 1.3, n);
      CHECK(io1 == io2);
    }
  }

  SUBCASE("convolutions match bit for bit") {
    for (const int ks : {3, 5, 7}) {
      const auto taps = gaussian_taps(ks);
      const std::size_t radius = static_cast<std::size_t>(ks / 2);
      for (const auto& [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {9, 21}, {17, 33}, {64, 5}}) {
        const auto in = random_plane(h * w, rng);
        std::vector<double> o1(h * w), o2(h * w);
        s.convolve_rows(in.data(), o1.data(), h, w, taps.data(), radius);
        v->convolve_rows(in.data(), o2.data(), h, w, taps.data(), radius);
        CHECK(o1 == o2);
        s.convolve_cols(in.data(), o1.data(), h, w, taps.data(), radius);
        v->convolve_cols(in.data(), o2.data(), h, w, taps.data(), radius);
        CHECK(o1 == o2);
      }
    }
  }

  SUBCASE("reductions agree to rounding") {
    for (const std::size_t n : kSizes) {
      const auto a = random_plane(n, rng, true), b = random_plane(n, rng);
      const auto s1 = s.plane_stats(a.data(), n), s2 = v->plane_stats(a.data(), n);
      CHECK(s1.extreme == s2.extreme);
      CHECK(std::abs(s1.sum - s2.sum) <= 1e-12 * std::max(1.0, s1.sum));
      const double d1 = s.dot(a.data(), b.data(), n), d2 = v->dot(a.data(), b.data(), n);
      CHECK(std::abs(d1 - d2) <= 1e-12 * std::max(1.0, std::abs(d1)));
    }
  }

  SUBCASE("gamma agrees to 1e-9 relative and keeps fixed points") {
    for (const std::size_t n : kSizes) {
      for (const double e : {1.0, 0.9, 0.5, 1.0 / 3.0}) {
        auto a = random_plane(n, rng), b = a;
        s.gamma(a.data(), e, n);
        v->gamma(b.data(), e, n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9 * std::max(1.0, a[i]));
      }
    }
    std::vector<double> fixed{0.0, 255.0, 0.0, 255.0, 0.0};
    v->gamma(fixed.data(), 0.4, fixed.size());
    CHECK(fixed == std::vector<double>{0.0, 255.0, 0.0, 255.0, 0.0});
  }

  SUBCASE("results do not depend on alignment or position in the buffer") {
    auto base = random_plane(40, rng);
    std::vector<double> shifted(41);
    std::copy(base.begin(), base.end(), shifted.begin() + 1);
    v->gamma(base.data(), 0.45, 40);
    v->gamma(shifted.data() + 1, 0.45, 40);
    CHECK(std::equal(base.begin(), base.end(), shifted.begin() + 1));
  }
}

TEST_CASE("the full transform pipeline agrees across instruction sets") {
  if (k::avx2_table() == nullptr) return;
  Avx2Guard guard;
  std::mt19937_64 rng(7);
  Image img(64, 64, ColorMode::Integer);
  std::uniform_int_distribution<int> u(0, 255);
  for (std::size_t c = 0; c < 3; ++c) {
    for (double& x : img.plane(c)) x = u(rng);
  }
  TransformSampler sampler(TransformRanges{}, 3);
  for (int i = 0; i < 20; ++i) {
    const TransformParams p = sampler.next();
    k::select(k::Isa::Scalar);
    const Image a = apply_transforms(img, p);
    k::select(k::Isa::Avx2);
    const Image b = apply_transforms(img, p);
    double worst = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < a.pixel_count(); ++j) worst = std::max(worst, std::abs(a.plane(c)[j] - b.plane(c)[j]));
    }
    CHECK(worst <= 1e-7);
  }
}
