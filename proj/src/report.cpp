#include "chromafool/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chromafool/errors.hpp"

namespace chromafool {
namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "image_id,identity,success,vacuous,queries_used,verification_queries,filter_r,filter_g,filter_b,"
    "best_fitness,adversariality,final_quality,adv_bonafide,matched_correct_identity,iterations,evaluations,"
    "restarts,stop_reason";

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json record_json(const AttackRecord& r) {
  return {
      {"image_id", r.image_id},
      {"identity", r.identity},
      {"success", r.success},
      {"vacuous", r.vacuous},
      {"queries_used", r.queries_used},
      {"verification_queries", r.verification_queries},
      {"final_filter", r.final_filter.as_array()},
      {"best_fitness", r.best_fitness},
      {"adversariality", r.adversariality},
      {"final_quality", r.final_quality},
      {"adv_bonafide", r.adv_bonafide},
      {"matched_correct_identity", r.matched_correct_identity},
      {"iterations", r.iterations},
      {"evaluations", r.evaluations},
      {"restarts", r.restarts},
      {"stop_reason", r.stop_reason},
  };
}

AttackRecord record_from(const json& j) {
  AttackRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  r.identity = j.at("identity").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.vacuous = j.at("vacuous").get<bool>();
  r.queries_used = j.at("queries_used").get<std::uint64_t>();
  r.verification_queries = j.at("verification_queries").get<std::uint64_t>();
  const auto f = j.at("final_filter").get<std::array<double, 3>>();
  r.final_filter = ColorFilter::from_array(f);
  r.best_fitness = j.at("best_fitness").get<double>();
  r.adversariality = j.at("adversariality").get<double>();
  r.final_quality = j.at("final_quality").get<double>();
  r.adv_bonafide = j.at("adv_bonafide").get<bool>();
  r.matched_correct_identity = j.at("matched_correct_identity").get<bool>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  r.restarts = j.at("restarts").get<std::size_t>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  return r;
}

json metrics_json(const MetricsReport& m) {
  json curve = json::array();
  for (const auto& p : m.curve) curve.push_back({{"budget", p.budget}, {"successes", p.successes}, {"fr", p.fr}});
  return {
      {"n_images", m.n_images},
      {"n_vacuous", m.n_vacuous},
      {"n_attacked", m.n_attacked},
      {"n_successes", m.n_successes},
      {"fr", m.fr},
      {"aq", m.aq ? json(*m.aq) : json(nullptr)},
      {"aqs", m.aqs},
      {"oasr", m.oasr},
      {"adv_m", m.adv_m},
      {"adv_s", m.adv_s},
      {"total_queries", m.total_queries},
      {"verification_queries", m.verification_queries},
      {"fr_curve", curve},
  };
}

MetricsReport metrics_from(const json& j) {
  MetricsReport m;
  m.n_images = j.at("n_images").get<std::size_t>();
  m.n_vacuous = j.at("n_vacuous").get<std::size_t>();
  m.n_attacked = j.at("n_attacked").get<std::size_t>();
  m.n_successes = j.at("n_successes").get<std::size_t>();
  m.fr = j.at("fr").get<double>();
  if (!j.at("aq").is_null()) m.aq = j.at("aq").get<double>();
  m.aqs = j.at("aqs").get<double>();
  m.oasr = j.at("oasr").get<double>();
  m.adv_m = j.at("adv_m").get<double>();
  m.adv_s = j.at("adv_s").get<double>();
  m.total_queries = j.at("total_queries").get<std::uint64_t>();
  m.verification_queries = j.at("verification_queries").get<std::uint64_t>();
  for (const auto& p : j.at("fr_curve")) {
    m.curve.push_back({p.at("budget").get<std::uint64_t>(), p.at("successes").get<std::size_t>(),
                       p.at("fr").get<double>()});
  }
  return m;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool csv_bool(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw FormatError("expected 0 or 1 in results CSV, got '" + s + "'");
}

double csv_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw FormatError("expected a number in results CSV, got '" + s + "'");
  return v;
}

std::uint64_t csv_uint(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError("expected an integer in results CSV, got '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace

std::string results_json(const ResultsDocument& doc) {
  json records = json::array();
  for (const auto& r : doc.records) records.push_back(record_json(r));
  const json j = {
      {"run",
       {{"variant", doc.info.variant},
        {"seed", doc.info.seed},
        {"oracle", doc.info.oracle},
        {"quality_threshold", doc.info.quality_threshold}}},
      {"metrics", metrics_json(doc.metrics)},
      {"records", records},
  };
  return j.dump(2) + "\n";
}

ResultsDocument parse_results_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ResultsDocument doc;
    const json& run = j.at("run");
    doc.info.variant = run.at("variant").get<std::string>();
    doc.info.seed = run.at("seed").get<std::uint64_t>();
    doc.info.oracle = run.at("oracle").get<std::string>();
    doc.info.quality_threshold = run.at("quality_threshold").get<double>();
    doc.metrics = metrics_from(j.at("metrics"));
    for (const auto& r : j.at("records")) doc.records.push_back(record_from(r));
    return doc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed results document: ") + e.what());
  }
}

std::string results_csv(const std::vector<AttackRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    const auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    out += r.image_id + "," + r.identity + "," + b(r.success) + "," + b(r.vacuous) + "," +
           std::to_string(r.queries_used) + "," + std::to_string(r.verification_queries) + "," +
           exact(r.final_filter.r) + "," + exact(r.final_filter.g) + "," + exact(r.final_filter.b) + "," +
           exact(r.best_fitness) + "," + exact(r.adversariality) + "," + exact(r.final_quality) + "," +
           b(r.adv_bonafide) + "," + b(r.matched_correct_identity) + "," + std::to_string(r.iterations) + "," +
           std::to_string(r.evaluations) + "," + std::to_string(r.restarts) + "," + r.stop_reason + "\n";
  }
  return out;
}

std::vector<AttackRecord> parse_results_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("results CSV header mismatch");
  std::vector<AttackRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 18) throw FormatError("results CSV row has " + std::to_string(c.size()) + " fields");
    AttackRecord r;
    r.image_id = c[0];
    r.identity = c[1];
    r.success = csv_bool(c[2]);
    r.vacuous = csv_bool(c[3]);
    r.queries_used = csv_uint(c[4]);
    r.verification_queries = csv_uint(c[5]);
    r.final_filter = {csv_double(c[6]), csv_double(c[7]), csv_double(c[8])};
    r.best_fitness = csv_double(c[9]);
    r.adversariality = csv_double(c[10]);
    r.final_quality = csv_double(c[11]);
    r.adv_bonafide = csv_bool(c[12]);
    r.matched_correct_identity = csv_bool(c[13]);
    r.iterations = csv_uint(c[14]);
    r.evaluations = csv_uint(c[15]);
    r.restarts = csv_uint(c[16]);
    r.stop_reason = c[17];
    out.push_back(std::move(r));
  }
  return out;
}

std::string curve_csv(const MetricsReport& metrics) {
  std::string out = "budget,successes,fr\n";
  for (const auto& p : metrics.curve) {
    out += std::to_string(p.budget) + "," + std::to_string(p.successes) + "," + exact(p.fr) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError(path.string() + " does not exist");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_results(const ResultsDocument& doc, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "results.json", results_json(doc));
  write_text(dir / "results.csv", results_csv(doc.records));
  write_text(dir / "fr_curve.csv", curve_csv(doc.metrics));
}

ResultsDocument read_results(const std::filesystem::path& results_json_path) {
  return parse_results_json(read_text(results_json_path));
}

std::string universal_json(const std::vector<UniversalRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({
        {"color_id", r.color_id},
        {"center_rgb", r.center.as_array()},
        {"member_count", r.member_count},
        {"fr", r.score.fr},
        {"aqs", r.score.aqs},
        {"oasr", r.score.oasr},
        {"queries", r.score.queries},
    });
  }
  return out.dump(2) + "\n";
}

}  // namespace chromafool
