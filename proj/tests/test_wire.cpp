#include <doctest.h>

#include <random>

#include <json.hpp>

#include "chromafool/conformance.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/wire.hpp"

using namespace chromafool;

namespace {

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("base64 matches the standard test vectors") {
  const std::vector<std::pair<std::string, std::string>> vectors{
      {"", ""},         {"f", "Zg=="},        {"fo", "Zm8="},         {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"},
  };
  for (const auto& [plain, encoded] : vectors) {
    CHECK(wire::base64_encode(bytes(plain)) == encoded);
    CHECK(wire::base64_decode(encoded) == bytes(plain));
  }
  std::mt19937_64 rng(1);
  for (int n = 0; n < 64; ++n) {
    std::vector<std::uint8_t> b(static_cast<std::size_t>(n));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    CHECK(wire::base64_decode(wire::base64_encode(b)) == b);
  }
  CHECK_THROWS_AS(wire::base64_decode("abc"), FormatError);
  CHECK_THROWS_AS(wire::base64_decode("ab!d"), FormatError);
}

TEST_CASE("requests round trip") {
  const Image img = golden_image();
  const std::string line = wire::encode_request("r7", img);
  CHECK(line.find('\n') == std::string::npos);
  const auto req = wire::decode_request(line);
  CHECK(req.id == "r7");
  CHECK(req.image == img);
  CHECK_THROWS_AS(wire::decode_request("{\"id\":\"a\",\"image_png_b64\":\"!!!!\"}"), FormatError);
  CHECK_THROWS_AS(wire::decode_request("{\"image_png_b64\":\"\"}"), FormatError);
  CHECK_THROWS_AS(wire::decode_request("[1,2]"), FormatError);
}

TEST_CASE("responses round trip") {
  const PipelineVerdict v{Label::Bonafide, 0.7, "alice"};
  CHECK(wire::decode_response(wire::encode_response("x", v), std::string("x")) == v);
  const PipelineVerdict s{Label::Spoofing, 0.0, std::nullopt};
  CHECK(wire::decode_response(wire::encode_response("y", s)) == s);
  CHECK(wire::encode_response("golden-0", {Label::Bonafide, 0.75, "id_03"}) == std::string(kGoldenResponse));
}

TEST_CASE("golden transcript decodes") {
  const auto v = wire::decode_response(kGoldenResponse, std::string(kGoldenRequestId));
  CHECK(v.label == Label::Bonafide);
  CHECK(v.quality == 0.75);
  CHECK(v.match_id == std::optional<std::string>("id_03"));
}

TEST_CASE("the builtin colorgate reproduces the golden transcript") {
  const PipelineVerdict v = colorgate_verdict(golden_image(), ColorGateParams{}, nullptr);
  const Gallery g = golden_gallery();
  const PipelineVerdict m = colorgate_verdict(golden_image(), ColorGateParams{}, &g);
  CHECK(v.label == Label::Bonafide);
  CHECK(wire::encode_response(std::string(kGoldenRequestId), m) == std::string(kGoldenResponse));
}

TEST_CASE("invalid responses are rejected") {
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","quality":0.5,"match_id":null})"), MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":1,"quality":1.5,"match_id":null})"),
                  OutOfRangeResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":2,"quality":0.5,"match_id":null})"),
                  OutOfRangeResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":1,"quality":-0.1,"match_id":null})"),
                  OutOfRangeResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":"1","quality":0.5,"match_id":null})"),
                  MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":1,"quality":0.5,"match_id":3})"),
                  MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","label":1,"quality":0.5})"), MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"a","error":"boom"})"), MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(R"({"id":"b","label":1,"quality":0.5,"match_id":null})", std::string("a")),
                  MalformedResponse);
  CHECK_THROWS_AS(wire::decode_response(""), MalformedResponse);
}

TEST_CASE("1000 random malformed lines never decode") {
  std::mt19937_64 rng(2024);
  const std::string valid = R"({"id":"q","label":1,"quality":0.5,"match_id":"m"})";
  const std::vector<std::string> fragments{"{", "}", "\"", ":", ",", "null", "1", "0.5", "label", "id", "[", "]", "x"};
  std::size_t rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    switch (i % 4) {
      case 0: {  // truncation
        line = valid.substr(0, rng() % (valid.size() - 1));
        break;
      }
      case 1: {  // random bytes
        const std::size_t n = 1 + rng() % 80;
        for (std::size_t k = 0; k < n; ++k) line.push_back(static_cast<char>(rng() % 256));
        break;
      }
      case 2: {  // token soup
        const std::size_t n = 1 + rng() % 20;
        for (std::size_t k = 0; k < n; ++k) line += fragments[rng() % fragments.size()];
        break;
      }
      default: {  // one field dropped from a valid object
        nlohmann::json j = nlohmann::json::parse(valid);
        const std::vector<std::string> keys{"id", "label", "quality", "match_id"};
        j.erase(keys[rng() % keys.size()]);
        line = j.dump();
        break;
      }
    }
    try {
      wire::decode_response(line, std::string("q"));
    } catch (const MalformedResponse&) {
      ++rejected;
    }
  }
  CHECK(rejected == 1000);
}
