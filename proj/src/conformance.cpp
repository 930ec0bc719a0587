#include "chromafool/conformance.hpp"

#include <cmath>

#include "chromafool/errors.hpp"
#include "chromafool/wire.hpp"

namespace chromafool {

Image golden_pattern(std::size_t index) {
  if (index > 3) throw InvalidArgument("golden patterns are numbered 0 to 3");
  constexpr std::array<double, 3> hi{156.0, 62.0, 166.0};
  constexpr std::array<double, 3> lo{140.0, 54.0, 150.0};
  Image img(8, 8, ColorMode::Integer);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      bool high = false;
      switch (index) {
        case 0: high = x < 4; break;
        case 1: high = y < 4; break;
        case 2: high = (x / 4 + y / 4) % 2 == 0; break;
        default: high = (x / 2 + y / 2) % 2 == 0; break;
      }
      const auto& v = high ? hi : lo;
      for (std::size_t c = 0; c < 3; ++c) img.at(static_cast<Channel>(c), y, x) = v[c];
    }
  }
  return img;
}

Image golden_image() { return golden_pattern(3); }

Gallery golden_gallery() {
  Gallery g;
  for (std::size_t i = 0; i < 4; ++i) g.enroll("id_0" + std::to_string(i), golden_pattern(i));
  return g;
}

CheckResult oracle_check(Oracle& oracle) {
  const PipelineVerdict expected = wire::decode_response(kGoldenResponse, std::string(kGoldenRequestId));
  CheckResult r;
  try {
    r.verdict = oracle.query(golden_image());
  } catch (const Error& e) {
    r.message = std::string("query failed: ") + e.what();
    return r;
  }
  r.response = wire::encode_response(kGoldenRequestId, r.verdict);
  if (r.verdict.label != expected.label) {
    r.message = "label differs from the golden response";
  } else if (!(std::abs(r.verdict.quality - expected.quality) <= 1e-6)) {
    r.message = "quality differs from the golden response";
  } else if (r.verdict.match_id != expected.match_id) {
    r.message = "match id differs from the golden response";
  } else {
    r.passed = true;
    r.message = "matches the golden response";
  }
  return r;
}

}  // namespace chromafool
