#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "chromafool/config.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/report.hpp"

using namespace chromafool;

TEST_CASE("empty config keeps the defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.attack.variant == Variant::Full);
  CHECK(c.attack.quality_weight == 0.6);
  CHECK(c.attack.n_samples == 40);
  CHECK(c.attack.pso.n_particles == 30);
  CHECK(c.attack.pso.max_iterations == 100);
  CHECK(c.attack.pso.inertia == 0.729);
  CHECK(c.attack.pso.cognitive == 1.49445);
  CHECK(c.attack.pso.social == 1.49445);
  CHECK(c.attack.pso.stagnation_limit == 10);
  CHECK(c.oracle.kind == OracleSpec::Kind::Colorgate);
  CHECK(c.colorgate.tolerance == 0.08);
  CHECK(c.quality_threshold == 0.3);
}

TEST_CASE("every section parses") {
  const RunConfig c = parse_config(R"(
[attack]
variant = as
quality_weight = 0.25
n_samples = 12
query_limit = 5000
fitness_form = eq5
restart_without_success = false
quality_threshold = 0.4
workers = 3
seed = 99

[pso]
n_particles = 20
max_iterations = 50
velocity_clamp = 0.3
stagnation_limit = 7

[transforms]
rotation = -30, 30
brightness_coeff = 0.5, 1.5
gaussian_kernel = 3, 5
illumination_probability = 0.25

[oracle]
spec = exec:python3 bridge.py
secret_chroma = 0.5, 0.2, 0.3
tolerance = 0.05
max_retries = 1
timeout_ms = 100
)");
  CHECK(c.attack.variant == Variant::AS);
  CHECK(c.attack.quality_weight == 0.25);
  CHECK(c.attack.n_samples == 12);
  CHECK(c.attack.query_limit == 5000);
  CHECK(c.attack.fitness_form == FitnessForm::Eq5);
  CHECK_FALSE(c.attack.restart_without_success);
  CHECK(c.quality_threshold == 0.4);
  CHECK(c.workers == 3);
  CHECK(c.attack.seed == 99);
  CHECK(c.attack.pso.n_particles == 20);
  CHECK(c.attack.pso.max_iterations == 50);
  CHECK(c.attack.pso.velocity_clamp == 0.3);
  CHECK(c.attack.pso.stagnation_limit == 7);
  CHECK(c.attack.transforms.rotation.lo == -30.0);
  CHECK(c.attack.transforms.rotation.hi == 30.0);
  CHECK(c.attack.transforms.brightness_coeff.hi == 1.5);
  CHECK(c.attack.transforms.gaussian_kernel == std::vector<int>{3, 5});
  CHECK(c.attack.transforms.illumination_probability == 0.25);
  CHECK(c.oracle.kind == OracleSpec::Kind::Exec);
  CHECK(c.oracle.target == "python3 bridge.py");
  CHECK(c.colorgate.secret_chroma == std::array<double, 3>{0.5, 0.2, 0.3});
  CHECK(c.colorgate.tolerance == 0.05);
  CHECK(c.transport.max_retries == 1);
  CHECK(c.transport.timeout_ms == 100);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse_config("[attack]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[attack]\nn_samples = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[attack]\nquality_weight = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[attack]\nvariant = turbo\n"), Error);
  CHECK_THROWS_AS(parse_config("[transforms]\nrotation = 30\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[transforms]\ngamma_coeff = 3, 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[oracle]\nsecret_chroma = 0.5, 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[attack\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/chromafool.ini"), NotFoundError);
}

TEST_CASE("config files load") {
  const auto path = std::filesystem::temp_directory_path() / "chromafool_test_config.ini";
  write_text(path, "[pso]\nn_particles = 12\n");
  CHECK(load_config(path).attack.pso.n_particles == 12);
  std::filesystem::remove(path);
}

TEST_CASE("seed environment override") {
  ::unsetenv(kSeedEnv);
  CHECK_FALSE(seed_from_env().has_value());
  ::setenv(kSeedEnv, "1234", 1);
  CHECK(seed_from_env() == std::optional<std::uint64_t>(1234));
  ::setenv(kSeedEnv, "12x", 1);
  CHECK_THROWS_AS(seed_from_env(), ConfigError);
  ::unsetenv(kSeedEnv);
}
