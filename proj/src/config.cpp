#include "chromafool/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chromafool/errors.hpp"

namespace chromafool {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range");
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

Interval to_interval(const std::string& key, const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError(key + ": expected 'lo, hi'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

// One handler per accepted key; the handler receives the trimmed value.
using Handler = std::function<void(const std::string& key, const std::string& value)>;

std::map<std::string, std::map<std::string, Handler>> handlers(RunConfig& c) {
  AttackConfig& a = c.attack;
  pso::PsoConfig& p = c.attack.pso;
  TransformRanges& t = c.attack.transforms;
  auto interval = [](Interval& iv) { return [&iv](const std::string& k, const std::string& v) { iv = to_interval(k, v); }; };
  auto real = [](double& d) { return [&d](const std::string& k, const std::string& v) { d = to_double(k, v); }; };
  auto size = [](std::size_t& n) {
    return [&n](const std::string& k, const std::string& v) { n = static_cast<std::size_t>(to_uint(k, v)); };
  };
  auto integer = [](int& n) {
    return [&n](const std::string& k, const std::string& v) {
      const auto u = to_uint(k, v);
      if (u > 1'000'000'000ULL) throw ConfigError(k + ": value too large");
      n = static_cast<int>(u);
    };
  };
  return {
      {"attack",
       {
           {"variant", [&a](const std::string&, const std::string& v) { a.variant = parse_variant(v); }},
           {"quality_weight", real(a.quality_weight)},
           {"n_samples", size(a.n_samples)},
           {"query_limit", [&a](const std::string& k, const std::string& v) { a.query_limit = to_uint(k, v); }},
           {"fitness_form", [&a](const std::string&, const std::string& v) { a.fitness_form = parse_fitness_form(v); }},
           {"fool_expectation_max", real(a.fool_expectation_max)},
           {"fooled_quality_min", real(a.fooled_quality_min)},
           {"verify_samples", size(a.verify_samples)},
           {"restart_without_success",
            [&a](const std::string& k, const std::string& v) { a.restart_without_success = to_bool(k, v); }},
           {"quality_threshold", real(c.quality_threshold)},
           {"workers", size(c.workers)},
           {"seed", [&a](const std::string& k, const std::string& v) { a.seed = to_uint(k, v); }},
       }},
      {"pso",
       {
           {"n_particles", size(p.n_particles)},
           {"max_iterations", size(p.max_iterations)},
           {"inertia", real(p.inertia)},
           {"cognitive", real(p.cognitive)},
           {"social", real(p.social)},
           {"velocity_clamp", real(p.velocity_clamp)},
           {"stagnation_limit", size(p.stagnation_limit)},
       }},
      {"transforms",
       {
           {"illumination_coeff", interval(t.illumination_coeff)},
           {"illumination_center", interval(t.illumination_center)},
           {"illumination_radius", interval(t.illumination_radius)},
           {"brightness_coeff", interval(t.brightness_coeff)},
           {"gamma_coeff", interval(t.gamma_coeff)},
           {"translation", interval(t.translation)},
           {"rotation", interval(t.rotation)},
           {"crop", interval(t.crop)},
           {"gaussian_kernel",
            [&t](const std::string& k, const std::string& v) {
              t.gaussian_kernel.clear();
              for (const auto& item : split_list(v)) t.gaussian_kernel.push_back(static_cast<int>(to_uint(k, item)));
            }},
           {"illumination_probability", real(t.illumination_probability)},
       }},
      {"oracle",
       {
           {"spec", [&c](const std::string&, const std::string& v) { c.oracle = OracleSpec::parse(v); }},
           {"secret_chroma",
            [&c](const std::string& k, const std::string& v) {
              const auto parts = split_list(v);
              if (parts.size() != 3) throw ConfigError(k + ": expected three numbers");
              for (std::size_t i = 0; i < 3; ++i) c.colorgate.secret_chroma[i] = to_double(k, parts[i]);
            }},
           {"tolerance", real(c.colorgate.tolerance)},
           {"match_threshold", real(c.colorgate.match_threshold)},
           {"max_retries", integer(c.transport.max_retries)},
           {"initial_backoff_ms", integer(c.transport.initial_backoff_ms)},
           {"timeout_ms", integer(c.transport.timeout_ms)},
       }},
  };
}

}  // namespace

void RunConfig::validate() const {
  try {
    attack.validate();
    colorgate.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(quality_threshold >= 0.0 && quality_threshold <= 1.0)) {
    throw ConfigError("attack.quality_threshold must be in [0, 1]");
  }
  if (transport.timeout_ms <= 0) throw ConfigError("oracle.timeout_ms must be positive");
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  const auto table = handlers(c);
  for (const auto& [section, body] : tree) {
    const auto known = table.find(section);
    if (known == table.end()) throw ConfigError("unknown config section [" + section + "]");
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("config key '" + section + "' must appear inside a section");
    }
    for (const auto& [key, node] : body) {
      const auto h = known->second.find(key);
      if (h == known->second.end()) throw ConfigError("unknown config key " + section + "." + key);
      try {
        h->second(section + "." + key, trim(node.data()));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
      }
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError(path.string() + " does not exist");
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv(kSeedEnv);
  if (v == nullptr) return std::nullopt;
  return to_uint(kSeedEnv, trim(v));
}

}  // namespace chromafool
