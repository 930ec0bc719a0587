#include <doctest.h>

#include <cmath>
#include <random>

#include "chromafool/errors.hpp"
#include "chromafool/transforms.hpp"

using namespace chromafool;

namespace {

Image random_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  Image img(h, w, ColorMode::Integer);
  std::uniform_int_distribution<int> u(0, 255);
  for (std::size_t c = 0; c < 3; ++c) {
    for (double& v : img.plane(c)) v = u(rng);
  }
  return img;
}

double max_abs_diff(const Image& a, const Image& b) {
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a.pixel_count(); ++i) worst = std::max(worst, std::abs(a.plane(c)[i] - b.plane(c)[i]));
  }
  return worst;
}

bool in_range(const Image& img) {
  for (std::size_t c = 0; c < 3; ++c) {
    for (const double v : img.plane(c)) {
      if (!(v >= 0.0 && v <= 255.0)) return false;
    }
  }
  return true;
}

// Mean absolute deviation over all channels inside the disk inscribed in the frame.
double disk_mad(const Image& a, const Image& b) {
  const double cx = (static_cast<double>(a.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(a.height()) - 1.0) / 2.0;
  const double radius = static_cast<double>(std::min(a.width(), a.height())) / 2.0 - 2.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < a.height(); ++y) {
    for (std::size_t x = 0; x < a.width(); ++x) {
      if (std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy) > radius) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        sum += std::abs(a.at(static_cast<Channel>(c), y, x) - b.at(static_cast<Channel>(c), y, x));
        ++n;
      }
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("illumination") {
  const Image x = Image::filled(21, 21, {50, 50, 50});
  const Image y = illuminate(x, 100.0, 10.0, 10.0, 8.0);
  CHECK(y.at(Channel::R, 10, 10) == doctest::Approx(150.0));
  CHECK(y.at(Channel::G, 10, 18) == doctest::Approx(50.0));
  CHECK(y.at(Channel::B, 2, 10) == doctest::Approx(50.0));
  CHECK(y.at(Channel::B, 0, 0) == doctest::Approx(50.0));

  const Image z = illuminate(Image::filled(21, 21, {200, 200, 200}), 200.0, 10.0, 10.0, 8.0);
  CHECK(z.at(Channel::R, 10, 14) == doctest::Approx(255.0));
  CHECK_THROWS_AS(illuminate(x, 1.0, 0, 0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(illuminate(x, -1.0, 0, 0, 5.0), InvalidArgument);
}

TEST_CASE("brightness") {
  std::mt19937_64 rng(1);
  const Image x = random_image(rng, 9, 9);
  CHECK(max_abs_diff(adjust_brightness(x, 1.0), x) == 0.0);
  CHECK(adjust_brightness(Image::filled(8, 8, {200, 0, 0}), 2.0).at(Channel::R, 0, 0) == 255.0);
  CHECK(adjust_brightness(Image::filled(8, 8, {100, 0, 0}), 0.5).at(Channel::R, 0, 0) == 50.0);
  CHECK_THROWS_AS(adjust_brightness(x, -0.1), InvalidArgument);
}

TEST_CASE("gamma") {
  std::mt19937_64 rng(2);
  const Image x = random_image(rng, 9, 9);
  CHECK(max_abs_diff(gamma_correct(x, 1.0), x) < 1e-12);
  CHECK(gamma_correct(Image::filled(8, 8, {63.75, 0, 255}), 2.0).at(Channel::R, 4, 4) == doctest::Approx(127.5));
  for (const double g : {1.0, 1.7, 3.0}) {
    const Image y = gamma_correct(Image::filled(8, 8, {0, 0, 0}), g);
    CHECK(y.at(Channel::G, 1, 1) == 0.0);
  }
  CHECK_THROWS_AS(gamma_correct(x, 0.9), InvalidArgument);
}

TEST_CASE("geometric transform") {
  std::mt19937_64 rng(3);
  const Image x = random_image(rng, 32, 40);

  SUBCASE("zero parameters are the identity") { CHECK(max_abs_diff(geo_transform(x, 0, 0, 0, 0), x) == 0.0); }

  SUBCASE("translation shifts columns and fills black") {
    const Image y = geo_transform(x, 10.0, 0.0, 0.0, 0.0);
    for (std::size_t r = 0; r < x.height(); ++r) {
      for (std::size_t c = 0; c < x.width(); ++c) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double expected = c >= 10 ? x.at(static_cast<Channel>(ch), r, c - 10) : 0.0;
          CHECK(y.at(static_cast<Channel>(ch), r, c) == doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("rotating by 60 degrees and back preserves smooth content") {
    for (const std::size_t n : {64u, 256u}) {
      Image g(n, n, ColorMode::Continuous);
      const double s = static_cast<double>(n - 1);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          g.at(Channel::R, r, c) = 255.0 * static_cast<double>(c) / s;
          g.at(Channel::G, r, c) = 255.0 * static_cast<double>(r) / s;
          g.at(Channel::B, r, c) = 127.5 + 127.5 * std::sin(static_cast<double>(c) / 8.0) * std::cos(static_cast<double>(r) / 11.0);
        }
      }
      const Image back = geo_transform(geo_transform(g, 0, 0, 60.0, 0), 0, 0, -60.0, 0);
      CHECK(disk_mad(back, g) < 10.0);
    }
  }

  SUBCASE("negative crop pads with black, positive crop magnifies") {
    const Image u = Image::filled(32, 32, {100, 100, 100});
    const Image padded = geo_transform(u, 0, 0, 0, -8.0);
    CHECK(padded.at(Channel::R, 0, 0) == 0.0);
    CHECK(padded.at(Channel::R, 16, 16) == doctest::Approx(100.0));
    const Image zoomed = geo_transform(u, 0, 0, 0, 8.0);
    CHECK(zoomed.at(Channel::R, 0, 0) == doctest::Approx(100.0));
  }
}

TEST_CASE("gaussian blur") {
  for (const int k : {3, 5, 7}) {
    const auto taps = gaussian_taps(k);
    CHECK(taps.size() == static_cast<std::size_t>(k));
    double sum = 0.0;
    for (const double t : taps) sum += t;
    CHECK(std::abs(sum - 1.0) < 1e-9);

    const Image u = Image::filled(12, 12, {30, 60, 90});
    CHECK(max_abs_diff(gaussian_blur(u, k), u) < 1e-9);

    Image dot = Image::filled(15, 15, {0, 0, 0});
    dot.at(Channel::G, 7, 7) = 255.0;
    const Image b = gaussian_blur(dot, k);
    for (std::size_t r = 0; r < 15; ++r) {
      for (std::size_t c = 0; c < 15; ++c) {
        CHECK(b.at(Channel::G, r, c) == doctest::Approx(b.at(Channel::G, r, 14 - c)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(gaussian_blur(Image::filled(8, 8, {0, 0, 0}), 4), InvalidArgument);
}

TEST_CASE("parameter sampling") {
  SUBCASE("same seed gives the same sequence") {
    TransformSampler a(TransformRanges{}, 99);
    TransformSampler b(TransformRanges{}, 99);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  }
  SUBCASE("brightness draws average the midpoint") {
    TransformSampler s(TransformRanges{}, 7);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += s.next().brightness_coeff;
    CHECK(std::abs(sum / 10000.0 - 1.0) < 0.02);
  }
  SUBCASE("degenerate intervals are exact") {
    TransformRanges r;
    r.brightness_coeff = {1.3, 1.3};
    r.rotation = {-7.25, -7.25};
    TransformSampler s(r, 5);
    for (int i = 0; i < 200; ++i) {
      const auto p = s.next();
      CHECK(p.brightness_coeff == 1.3);
      CHECK(p.rotation_deg == -7.25);
    }
  }
  SUBCASE("draws stay inside their ranges") {
    const TransformRanges r;
    TransformSampler s(r, 11);
    for (int i = 0; i < 1000; ++i) {
      const auto p = s.next();
      CHECK(r.brightness_coeff.contains(p.brightness_coeff));
      CHECK(r.gamma_coeff.contains(p.gamma_coeff));
      CHECK(r.rotation.contains(p.rotation_deg));
      CHECK(r.translation.contains(p.translation_x));
      CHECK(r.translation.contains(p.translation_y));
      CHECK(r.crop.contains(p.crop));
      CHECK(r.illumination_radius.contains(p.illumination_radius));
    }
  }
  SUBCASE("invalid ranges are rejected") {
    TransformRanges r;
    r.gamma_coeff = {3.0, 1.0};
    CHECK_THROWS_AS(r.validate(), InvalidArgument);
    r = TransformRanges{};
    r.gaussian_kernel = {4};
    CHECK_THROWS_AS(r.validate(), InvalidArgument);
    r = TransformRanges{};
    r.illumination_probability = 1.5;
    CHECK_THROWS_AS(r.validate(), InvalidArgument);
  }
}

TEST_CASE("composed transforms over 1000 random draws") {
  std::mt19937_64 rng(17);
  const Image x = random_image(rng, 32, 32);
  TransformSampler sampler(TransformRanges{}, 2024);
  CHECK(max_abs_diff(apply_transforms(x, TransformParams::identity()), x) == 0.0);
  for (int i = 0; i < 1000; ++i) {
    TransformParams p = sampler.next();
    const Image a = apply_transforms(x, p);
    CHECK(in_range(a));
    CHECK(max_abs_diff(apply_transforms(x, p), a) == 0.0);

    // Brighter draws never darken any pixel.
    TransformParams brighter = p;
    brighter.brightness_coeff = p.brightness_coeff * 1.1;
    const Image b = apply_transforms(x, brighter);
    double worst = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < a.pixel_count(); ++j) worst = std::min(worst, b.plane(c)[j] - a.plane(c)[j]);
    }
    CHECK(worst >= -1e-9);

    // Stronger illumination never darkens any pixel either.
    if (p.apply_illumination) {
      TransformParams lit = p;
      lit.illumination_coeff = p.illumination_coeff + 20.0;
      const Image l = apply_transforms(x, lit);
      double w2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t j = 0; j < a.pixel_count(); ++j) w2 = std::min(w2, l.plane(c)[j] - a.plane(c)[j]);
      }
      CHECK(w2 >= -1e-9);
    }
  }
}
