#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "chromafool/errors.hpp"
#include "chromafool/oracle.hpp"

using namespace chromafool;

namespace {

// Independent chroma distance for a uniform color.
double chroma_distance(std::array<double, 3> rgb, std::array<double, 3> secret) {
  const double s = rgb[0] + rgb[1] + rgb[2];
  double d2 = 0.0;
  for (int c = 0; c < 3; ++c) d2 += (rgb[c] / s - secret[c]) * (rgb[c] / s - secret[c]);
  return std::sqrt(d2);
}

Image half_pattern(bool vertical, std::size_t n = 64) {
  Image img(n, n, ColorMode::Integer);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const bool hi = vertical ? x < n / 2 : y < n / 2;
      for (std::size_t c = 0; c < 3; ++c) img.at(static_cast<Channel>(c), y, x) = hi ? 180.0 : 60.0;
    }
  }
  return img;
}

Image textured(std::uint64_t seed, std::size_t n = 96) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(20, 200);
  Image img(n, n, ColorMode::Integer);
  for (std::size_t c = 0; c < 3; ++c) {
    for (double& v : img.plane(c)) v = u(rng);
  }
  return img;
}

}  // namespace

TEST_CASE("always-spoof oracle") {
  AlwaysSpoofOracle o;
  const auto v = o.query(textured(1));
  CHECK(v.label == Label::Spoofing);
  CHECK(v.quality == 0.5);
  CHECK_FALSE(v.match_id.has_value());
}

TEST_CASE("colorgate decisions") {
  const ColorGateParams p;
  SUBCASE("secret chroma is bonafide") {
    const Image img = Image::filled(16, 16, {90, 20, 90}, ColorMode::Integer);
    CHECK(chroma_distance({90, 20, 90}, p.secret_chroma) < 1e-12);
    CHECK(colorgate_verdict(img, p).label == Label::Bonafide);
  }
  SUBCASE("uniform purple is bonafide") {
    const double d = chroma_distance({128, 28, 128}, p.secret_chroma);
    CHECK(d < p.tolerance);
    CHECK(colorgate_verdict(Image::filled(16, 16, {128, 28, 128}), p).label == Label::Bonafide);
  }
  SUBCASE("uniform gray is spoofing") {
    const double d = chroma_distance({128, 128, 128}, p.secret_chroma);
    CHECK(d == doctest::Approx(0.2858).epsilon(1e-3));
    CHECK(d > p.tolerance);
    CHECK(colorgate_verdict(Image::filled(16, 16, {128, 128, 128}), p).label == Label::Spoofing);
  }
  SUBCASE("black is spoofing") {
    CHECK(colorgate_verdict(Image::filled(16, 16, {0, 0, 0}), p).label == Label::Spoofing);
  }
  SUBCASE("quality follows brightness and saturation") {
    CHECK(colorgate_verdict(Image::filled(16, 16, {128, 128, 128}), p).quality == doctest::Approx(1.0));
    CHECK(colorgate_verdict(Image::filled(16, 16, {64, 64, 64}), p).quality == doctest::Approx(0.5));
    Image half = Image::filled(16, 16, {128, 128, 128}, ColorMode::Integer);
    for (double& v : half.plane(Channel::R)) v = 255.0;
    const auto st = image_statistics(half);
    CHECK(st.saturated_fraction == doctest::Approx(1.0 / 3.0));
    const double gray = 0.3 * 255.0 + 0.7 * 128.0;
    CHECK(colorgate_verdict(half, p).quality ==
          doctest::Approx((1.0 - std::abs(gray - 128.0) / 128.0) * (2.0 / 3.0)));
  }
  SUBCASE("invalid parameters are rejected") {
    ColorGateParams bad;
    bad.tolerance = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
}

TEST_CASE("sessions count every query") {
  ColorGateOracle o;
  OracleSession s(o, 5);
  const Image img = Image::filled(16, 16, {128, 28, 128});
  const auto a = s.classify(img);
  const auto b = s.classify(img);
  CHECK(a == b);
  CHECK(s.ledger().count() == 2);
  s.classify(img);
  s.classify(img);
  s.classify(img);
  CHECK(s.ledger().headroom() == 0);
  CHECK_THROWS_AS(s.classify(img), QueryLimitExhausted);
  CHECK(s.ledger().count() == 5);
}

TEST_CASE("ledger is exact under concurrency") {
  QueryLedger ledger(4000);
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 1500; ++i) {
        try {
          ledger.acquire();
        } catch (const QueryLimitExhausted&) {
          ++failures;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ledger.count() == 4000);
  CHECK(failures.load() == 2000);
  ledger.refund();
  CHECK(ledger.headroom() == 1);
  ledger.extend(10);
  CHECK(ledger.headroom() == 11);
}

TEST_CASE("identity matching") {
  Gallery g;
  const Image alice = textured(10);
  const Image bob = textured(11);
  g.enroll("alice", alice);
  g.enroll("bob", bob);

  SUBCASE("self match") {
    const auto best = g.best(alice);
    REQUIRE(best.has_value());
    CHECK(best->identity == "alice");
    CHECK(best->score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(match_identity(bob, g) == std::optional<std::string>("bob"));
  }
  SUBCASE("filtering without clipping keeps the match") {
    const Image f = apply_filter(alice, {0.9, 0.2, 0.7}, ColorMode::Continuous);
    const auto best = g.best(f);
    REQUIRE(best.has_value());
    CHECK(best->identity == "alice");
    CHECK(std::abs(best->score - 1.0) < 1e-6);
  }
  SUBCASE("orthogonal pattern does not match") {
    Gallery one;
    one.enroll("rows", half_pattern(false));
    const auto best = one.best(half_pattern(true));
    REQUIRE(best.has_value());
    CHECK(std::abs(best->score) < 1e-9);
    CHECK_FALSE(match_identity(half_pattern(true), one).has_value());
  }
  SUBCASE("flat images have a zero template") {
    for (const double v : make_template(Image::filled(32, 32, {50, 50, 50}))) CHECK(v == 0.0);
    CHECK_FALSE(Gallery{}.best(alice).has_value());
  }
  SUBCASE("matcher runs only on bonafide verdicts") {
    ColorGateParams p;
    auto shared = std::make_shared<Gallery>(g);
    ColorGateOracle o(p, shared);
    const Image spoof = alice;
    CHECK_FALSE(o.query(spoof).match_id.has_value());
    const Image purple = apply_filter(alice, {0.9, 0.2, 0.9}, ColorMode::Continuous);
    const auto v = o.query(purple);
    CHECK(v.label == Label::Bonafide);
    CHECK(v.match_id == std::optional<std::string>("alice"));
  }
}

TEST_CASE("oracle specs") {
  CHECK(OracleSpec::parse("builtin:colorgate").kind == OracleSpec::Kind::Colorgate);
  CHECK(OracleSpec::parse("builtin:always-spoof").kind == OracleSpec::Kind::AlwaysSpoof);
  const auto e = OracleSpec::parse("exec:'python3 bridge.py --x'");
  CHECK(e.kind == OracleSpec::Kind::Exec);
  CHECK(e.target == "python3 bridge.py --x");
  const auto h = OracleSpec::parse("http:localhost:8080");
  CHECK(h.kind == OracleSpec::Kind::Http);
  CHECK(h.target == "http://localhost:8080");
  CHECK(OracleSpec::parse(h.to_string()).target == h.target);
  CHECK_THROWS_AS(OracleSpec::parse("builtin:nope"), InvalidArgument);
  CHECK_THROWS_AS(OracleSpec::parse("exec:"), InvalidArgument);

  OracleOptions opts;
  auto factory = oracle_factory(OracleSpec::parse("builtin:colorgate"), opts);
  auto a = factory();
  auto b = factory();
  CHECK(a.get() != b.get());
  CHECK(a->describe() == "builtin:colorgate");
}
