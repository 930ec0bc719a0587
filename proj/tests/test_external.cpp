#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

#include <httplib.h>

#include "chromafool/conformance.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/external_oracle.hpp"
#include "chromafool/wire.hpp"

using namespace chromafool;
namespace fs = std::filesystem;

namespace {

const std::string kFake = FAKE_ORACLE_PATH;

TransportOptions fast_options() {
  TransportOptions o;
  o.max_retries = 2;
  o.initial_backoff_ms = 5;
  o.timeout_ms = 5000;
  return o;
}

Image textured(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  Image img(16, 16, ColorMode::Integer);
  for (std::size_t c = 0; c < 3; ++c) {
    for (double& v : img.plane(c)) v = u(rng);
  }
  return img;
}

// Serves the builtin colorgate with the golden gallery over POST /v1/classify.
class TestServer {
 public:
  explicit TestServer(int fail_first = 0) : fail_left_(fail_first) {
    gallery_ = golden_gallery();
    server_.Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res) {
      if (fail_left_ > 0) {
        --fail_left_;
        res.status = 503;
        return;
      }
      try {
        const auto r = wire::decode_request(req.body);
        res.set_content(wire::encode_response(r.id, colorgate_verdict(r.image, ColorGateParams{}, &gallery_)),
                        "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  Gallery gallery_;
  std::atomic<int> fail_left_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("exec oracle agrees with the builtin") {
  ExecOracle o(kFake + " good", fast_options());
  const Gallery g = golden_gallery();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Image img = s % 2 == 0 ? textured(s) : apply_filter(textured(s), {0.9, 0.2, 0.9}, ColorMode::Integer);
    CHECK(o.query(img) == colorgate_verdict(img, ColorGateParams{}, &g));
  }
  const CheckResult r = oracle_check(o);
  CHECK(r.passed);
  CHECK(r.response == std::string(kGoldenResponse));
}

TEST_CASE("exec oracle answers 1000 sequential requests in order") {
  ExecOracle o(kFake + " good", fast_options());
  const Image spoof = Image::filled(8, 8, {128, 128, 128}, ColorMode::Integer);
  const Image bona = Image::filled(8, 8, {128, 28, 128}, ColorMode::Integer);
  std::size_t correct = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool expect_bona = (i * 7) % 3 == 0;
    const auto v = o.query(expect_bona ? bona : spoof);
    if ((v.label == Label::Bonafide) == expect_bona) ++correct;
  }
  CHECK(correct == 1000);
}

TEST_CASE("exec oracle protocol failures") {
  SUBCASE("garbage is malformed") {
    ExecOracle o(kFake + " garbage", fast_options());
    CHECK_THROWS_AS(o.query(golden_image()), MalformedResponse);
  }
  SUBCASE("mismatched id is malformed") {
    ExecOracle o(kFake + " wrong-id", fast_options());
    CHECK_THROWS_AS(o.query(golden_image()), MalformedResponse);
  }
  SUBCASE("a crashed child is restarted") {
    const fs::path marker = fs::temp_directory_path() / ("chromafool_crash_" + std::to_string(std::random_device{}()));
    ExecOracle o(kFake + " crash-once " + marker.string(), fast_options());
    CHECK(o.query(golden_image()).label == Label::Bonafide);
    CHECK(fs::exists(marker));
    fs::remove(marker);
  }
  SUBCASE("a silent child times out") {
    TransportOptions opts = fast_options();
    opts.max_retries = 1;
    opts.timeout_ms = 200;
    ExecOracle o(kFake + " silent", opts);
    CHECK_THROWS_AS(o.query(golden_image()), TransportError);
  }
  SUBCASE("a missing command is a transport error") {
    ExecOracle o("/nonexistent/oracle-binary", fast_options());
    CHECK_THROWS_AS(o.query(golden_image()), TransportError);
  }
}

TEST_CASE("http oracle") {
  SUBCASE("classifies and passes the golden check") {
    TestServer server;
    HttpOracle o(server.url(), fast_options());
    const Gallery g = golden_gallery();
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Image img = textured(s);
      CHECK(o.query(img) == colorgate_verdict(img, ColorGateParams{}, &g));
    }
    const CheckResult r = oracle_check(o);
    CHECK(r.passed);
    CHECK(r.response == std::string(kGoldenResponse));
  }
  SUBCASE("transient server errors are retried") {
    TestServer server(2);
    HttpOracle o(server.url(), fast_options());
    CHECK(o.query(golden_image()).label == Label::Bonafide);
  }
  SUBCASE("persistent server errors surface") {
    TestServer server(100);
    HttpOracle o(server.url(), fast_options());
    CHECK_THROWS_AS(o.query(golden_image()), TransportError);
  }
  SUBCASE("unreachable server") {
    std::string url;
    {
      TestServer server;
      url = server.url();
    }
    TransportOptions opts = fast_options();
    opts.timeout_ms = 500;
    HttpOracle o(url, opts);
    CHECK_THROWS_AS(o.query(golden_image()), TransportError);
  }
}

TEST_CASE("oracle specs build transport backends") {
  OracleOptions opts;
  opts.transport = fast_options();
  auto o = make_oracle(OracleSpec::parse("exec:" + kFake + " good"), opts);
  CHECK(o->describe() == "exec:" + kFake + " good");
  CHECK(oracle_check(*o).passed);

  AlwaysSpoofOracle spoof;
  const CheckResult bad = oracle_check(spoof);
  CHECK_FALSE(bad.passed);
  CHECK(bad.message == "label differs from the golden response");
}
