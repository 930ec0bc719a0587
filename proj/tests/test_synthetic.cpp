#include <doctest.h>

#include <filesystem>
#include <random>

#include "chromafool/errors.hpp"
#include "chromafool/manifest.hpp"
#include "chromafool/report.hpp"
#include "chromafool/synthetic.hpp"

using namespace chromafool;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("chromafool_syn_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("generated datasets are reproducible") {
  TempDir dir;
  SyntheticOptions o;
  o.n = 100;
  o.seed = 31;
  const Manifest a = generate_synthetic(o, dir.path / "a");
  const Manifest b = generate_synthetic(o, dir.path / "b");
  REQUIRE(a.entries.size() == 100);
  CHECK(a.entries == b.entries);
  std::size_t identical = 0;
  for (const auto& e : a.entries) {
    if (read_text(a.resolve(e)) == read_text(b.resolve(e))) ++identical;
  }
  CHECK(identical == 100);
  CHECK(read_text(dir.path / "a" / "manifest.csv") == read_text(dir.path / "b" / "manifest.csv"));

  const Manifest back = read_manifest(dir.path / "a" / "manifest.csv");
  CHECK(back.entries == a.entries);
  CHECK(Manifest::image_id(back.entries[0]) == "face_000");
}

TEST_CASE("spoof samples are rejected by colorgate and match themselves") {
  SyntheticOptions o;
  o.n = 100;
  o.n_bonafide = 20;
  o.seed = 5;
  const auto samples = synthesize(o);
  REQUIRE(samples.size() == 120);
  ColorGateOracle oracle;
  std::size_t spoofs = 0;
  for (const auto& s : samples) {
    CHECK(s.image.height() == kWorkingSize);
    s.image.validate();
    if (s.label != Label::Spoofing) continue;
    ++spoofs;
    CHECK(oracle.query(s.image).label == Label::Spoofing);
  }
  CHECK(spoofs == 100);
  Gallery g;
  for (std::size_t i = 0; i < 10; ++i) g.enroll(samples[i].identity, samples[i].image);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto best = g.best(samples[i].image);
    REQUIRE(best.has_value());
    CHECK(best->identity == samples[i].identity);
    CHECK(best->score == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("manifest handling") {
  TempDir dir;
  write_text(dir.path / "m.csv", "path,identity,label\nimgs/a.png,alice,spoof\nb.png,bob,bonafide\n");
  const Manifest m = read_manifest(dir.path / "m.csv");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].label == Label::Spoofing);
  CHECK(m.entries[1].label == Label::Bonafide);
  CHECK(m.resolve(m.entries[0]) == dir.path / "imgs" / "a.png");
  CHECK(Manifest::image_id(m.entries[0]) == "a");

  write_text(dir.path / "bad.csv", "path,identity,label\na.png,alice,maybe\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "bad.csv"), FormatError);
  write_text(dir.path / "dup.csv", "path,identity,label\na.png,alice,spoof\na.png,bob,spoof\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "dup.csv"), FormatError);
  write_text(dir.path / "hdr.csv", "file,who\na.png,alice\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "hdr.csv"), FormatError);
  CHECK_THROWS_AS(read_manifest(dir.path / "missing.csv"), NotFoundError);
}
