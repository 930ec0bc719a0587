#include <malloc.h>

#include <cstdio>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "chromafool/config.hpp"
#include "chromafool/conformance.hpp"
#include "chromafool/defense.hpp"
#include "chromafool/errors.hpp"
#include "chromafool/harness.hpp"
#include "chromafool/image_io.hpp"
#include "chromafool/parallel.hpp"
#include "chromafool/report.hpp"
#include "chromafool/synthetic.hpp"
#include "chromafool/universal.hpp"

namespace cf = chromafool;

namespace {

// Attack queries allocate and free megabyte-sized rasters in a tight loop;
// keeping them on the heap avoids a page-fault storm from mmap/munmap.
void tune_allocator() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

cf::RunConfig load_run_config(const std::string& path) {
  cf::RunConfig c = path.empty() ? cf::RunConfig{} : cf::load_config(path);
  if (const auto seed = cf::seed_from_env()) c.attack.seed = *seed;
  return c;
}

int gen_synthetic(std::size_t n, std::size_t n_bonafide, std::uint64_t seed, const std::string& prefix,
                  const std::string& out) {
  cf::SyntheticOptions o;
  o.n = n;
  o.n_bonafide = n_bonafide;
  o.seed = seed;
  o.prefix = prefix;
  const cf::Manifest m = cf::generate_synthetic(o, out);
  std::printf("wrote %zu images and manifest.csv to %s\n", m.entries.size(), out.c_str());
  return 0;
}

struct AttackArgs {
  std::string manifest;
  std::string oracle;
  std::string variant;
  std::string config;
  std::string out;
  std::size_t workers = 0;
  bool deterministic = false;
  bool save_images = false;
};

int attack(const AttackArgs& a) {
  cf::RunConfig cfg = load_run_config(a.config);
  if (!a.oracle.empty()) cfg.oracle = cf::OracleSpec::parse(a.oracle);
  if (!a.variant.empty()) cfg.attack.variant = cf::parse_variant(a.variant);
  if (a.workers != 0) cfg.workers = a.workers;
  cfg.validate();

  const cf::Manifest manifest = cf::read_manifest(a.manifest);
  cf::BatchOptions opts;
  opts.attack = cfg.attack;
  opts.quality_threshold = cfg.quality_threshold;
  opts.workers = cfg.workers;
  opts.deterministic = a.deterministic;
  if (a.save_images) opts.adversarial_dir = std::filesystem::path(a.out) / "adversarial";
  opts.on_record = [](const cf::AttackRecord& r) {
    std::fprintf(stderr, "%s success=%d queries=%llu adv=%.3f stop=%s\n", r.image_id.c_str(), r.success ? 1 : 0,
                 static_cast<unsigned long long>(r.queries_used), r.adversariality, r.stop_reason.c_str());
  };
  const auto factory = cf::oracle_factory(cfg.oracle, cf::oracle_options(cfg, manifest));
  const cf::BatchResult result = cf::run_batch(manifest, factory, opts);

  cf::ResultsDocument doc;
  doc.info = {cf::to_string(cfg.attack.variant), cfg.attack.seed, cfg.oracle.to_string(), cfg.quality_threshold};
  doc.records = result.records;
  doc.metrics = result.metrics;
  cf::write_results(doc, a.out);
  const auto& m = result.metrics;
  std::printf("attacked %zu  FR %.3f  AQ %s  AQS %.3f  OASR %.3f  Adv-m %.3f  Adv-s %.3f\n", m.n_attacked, m.fr,
              m.aq ? std::to_string(*m.aq).c_str() : "n/a", m.aqs, m.oasr, m.adv_m, m.adv_s);
  return 0;
}

struct UniversalArgs {
  std::string records;
  std::size_t k = 3;
  std::string eval_manifest;
  std::string oracle;
  std::string config;
  std::string out;
  std::size_t samples = 10;
  std::size_t restarts = 50;
  std::size_t workers = 0;
};

int universal(const UniversalArgs& a) {
  cf::RunConfig cfg = load_run_config(a.config);
  if (!a.oracle.empty()) cfg.oracle = cf::OracleSpec::parse(a.oracle);
  const cf::ResultsDocument doc = cf::read_results(a.records);
  std::vector<cf::ColorFilter> filters;
  std::vector<std::string> ids;
  for (const auto& r : doc.records) {
    if (!r.success) continue;
    filters.push_back(r.final_filter);
    ids.push_back(r.image_id);
  }
  cf::ClusterOptions co;
  co.k = a.k;
  co.restarts = a.restarts;
  co.seed = cfg.attack.seed;
  const auto clusters = cf::cluster_filters(filters, ids, co);

  const cf::Manifest eval = cf::read_manifest(a.eval_manifest);
  const auto images = cf::load_spoof_images(eval);
  const auto factory = cf::oracle_factory(cfg.oracle, cf::oracle_options(cfg, eval));
  cf::UniversalEvalOptions eo;
  eo.transforms = cfg.attack.transforms;
  eo.n_samples = a.samples;
  eo.quality_threshold = cfg.quality_threshold;
  eo.seed = cfg.attack.seed;
  eo.workers = a.workers != 0 ? a.workers : (cfg.workers != 0 ? cfg.workers : cf::default_workers());

  std::vector<cf::UniversalRow> rows;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    cf::UniversalRow row{c + 1, clusters[c].center, clusters[c].member_count, {}};
    row.score = cf::evaluate_universal(row.center, images, factory, eo);
    std::printf("color %zu (%.3f, %.3f, %.3f) members %zu  FR %.3f  AQS %.3f  OASR %.3f\n", row.color_id,
                row.center.r, row.center.g, row.center.b, row.member_count, row.score.fr, row.score.aqs,
                row.score.oasr);
    rows.push_back(row);
  }
  std::filesystem::create_directories(a.out);
  cf::write_text(std::filesystem::path(a.out) / "universal.json", cf::universal_json(rows));
  return 0;
}

std::vector<cf::defense::DefenseSample> load_defense_set(const std::string& path) {
  const cf::Manifest m = cf::read_manifest(path);
  m.validate();
  std::vector<cf::defense::DefenseSample> out;
  for (const auto& e : m.entries) out.push_back(cf::defense::prepare_sample(cf::load_image(m.resolve(e)), e.label));
  return out;
}

struct DefendArgs {
  std::string train_manifest;
  std::string mode = "colorat";
  std::string out;
  std::size_t epochs = 0;
  double learning_rate = 0.4;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

int defend(const DefendArgs& a) {
  const auto data = load_defense_set(a.train_manifest);
  cf::defense::TrainResult r;
  if (a.mode == "plain") {
    cf::defense::PlainOptions o;
    if (a.epochs != 0) o.epochs = a.epochs;
    o.learning_rate = a.learning_rate;
    o.seed = a.seed;
    r = cf::defense::train_plain(data, o);
  } else if (a.mode == "colorat") {
    cf::defense::ColorAtOptions o;
    if (a.epochs != 0) o.epochs = a.epochs;
    o.learning_rate = a.learning_rate;
    o.batch_size = a.batch_size;
    o.seed = a.seed;
    r = cf::defense::train_colorat(data, o);
  } else {
    throw cf::InvalidArgument("unknown mode '" + a.mode + "' (expected plain or colorat)");
  }
  cf::defense::save_model(r.model, a.out);
  std::printf("trained %s model on %zu images, final loss %.6f -> %s\n", a.mode.c_str(), data.size(),
              r.loss_history.empty() ? 0.0 : r.loss_history.back(), a.out.c_str());
  return 0;
}

int defend_eval(const std::string& model_path, const std::string& manifest, std::size_t colors, std::uint64_t seed,
                const std::string& out) {
  const auto model = cf::defense::load_model(model_path);
  const auto data = load_defense_set(manifest);
  const auto m = cf::defense::defense_metrics(model, data, colors, seed);
  nlohmann::json j = {{"cauc", m.cauc}, {"ccauc", m.ccauc}, {"dmr", m.dmr}, {"colors", nlohmann::json::array()}};
  for (const auto& c : m.colors) j["colors"].push_back(c.as_array());
  const std::string text = j.dump(2) + "\n";
  if (!out.empty()) cf::write_text(out, text);
  std::cout << text;
  return 0;
}

int oracle_check(const std::string& spec_text, const std::string& config) {
  cf::RunConfig cfg = load_run_config(config);
  const cf::OracleSpec spec = spec_text.empty() ? cfg.oracle : cf::OracleSpec::parse(spec_text);
  cf::OracleOptions o;
  o.colorgate = cfg.colorgate;
  o.transport = cfg.transport;
  o.gallery = std::make_shared<const cf::Gallery>(cf::golden_gallery());
  const auto oracle = cf::make_oracle(spec, o);
  const cf::CheckResult r = cf::oracle_check(*oracle);
  std::printf("%s: %s\n  expected %s\n  received %s\n", spec.to_string().c_str(), r.message.c_str(),
              cf::kGoldenResponse, r.response.empty() ? "(none)" : r.response.c_str());
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Color-filter adversarial attacks against face recognition pipelines"};
  app.require_subcommand(1);

  std::size_t n = 100, n_bonafide = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_prefix = "face";
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic face dataset with a manifest");
  gen->add_option("--n", n, "Spoof-labeled images")->check(CLI::PositiveNumber);
  gen->add_option("--bonafide", n_bonafide, "Additional bonafide-labeled images");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--prefix", gen_prefix, "File name prefix");
  gen->add_option("--out", gen_out, "Output directory")->required();

  AttackArgs aa;
  auto* att = app.add_subcommand("attack", "Attack every spoof-labeled image of a manifest");
  att->add_option("--manifest", aa.manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  att->add_option("--oracle", aa.oracle, "builtin:colorgate | builtin:always-spoof | exec:<cmd> | http:<url>");
  att->add_option("--variant", aa.variant, "as | woq | full");
  att->add_option("--config", aa.config, "INI configuration file")->check(CLI::ExistingFile);
  att->add_option("--out", aa.out, "Output directory")->required();
  att->add_option("--workers", aa.workers, "Worker threads (default: logical cores)");
  att->add_flag("--deterministic", aa.deterministic, "Run on one worker");
  att->add_flag("--save-images", aa.save_images, "Write the returned adversarial images");

  UniversalArgs ua;
  auto* uni = app.add_subcommand("universal", "Cluster converged filters and score the centers");
  uni->add_option("--records", ua.records, "results.json of an attack run")->required()->check(CLI::ExistingFile);
  uni->add_option("--k", ua.k, "Number of clusters")->check(CLI::PositiveNumber);
  uni->add_option("--eval-manifest", ua.eval_manifest, "Held-out manifest")->required()->check(CLI::ExistingFile);
  uni->add_option("--oracle", ua.oracle, "Oracle spec");
  uni->add_option("--config", ua.config, "INI configuration file")->check(CLI::ExistingFile);
  uni->add_option("--samples", ua.samples, "Transform draws per image")->check(CLI::PositiveNumber);
  uni->add_option("--restarts", ua.restarts, "k-means restarts");
  uni->add_option("--workers", ua.workers, "Worker threads");
  uni->add_option("--out", ua.out, "Output directory")->required();

  DefendArgs da;
  auto* def = app.add_subcommand("defend", "Train the toy anti-spoofing model");
  def->add_option("--train-manifest", da.train_manifest, "Manifest with both labels")->required()->check(
      CLI::ExistingFile);
  def->add_option("--mode", da.mode, "plain | colorat")->check(CLI::IsMember({"plain", "colorat"}));
  def->add_option("--out", da.out, "Model JSON path")->required();
  def->add_option("--epochs", da.epochs, "Training epochs (default depends on mode)");
  def->add_option("--lr", da.learning_rate, "Learning rate");
  def->add_option("--batch-size", da.batch_size, "ColorAT minibatch size")->check(CLI::PositiveNumber);
  def->add_option("--seed", da.seed, "Training seed");

  std::string model_path, eval_manifest, eval_out;
  std::size_t colors = 5;
  std::uint64_t eval_seed = 0;
  auto* dev = app.add_subcommand("defend-eval", "cAUC, ccAUC and dMR of a trained model");
  dev->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  dev->add_option("--manifest", eval_manifest, "Evaluation manifest")->required()->check(CLI::ExistingFile);
  dev->add_option("--colors", colors, "Random colors for the colorized set");
  dev->add_option("--seed", eval_seed, "Color seed");
  dev->add_option("--out", eval_out, "Write the metrics JSON here as well");

  std::string check_spec, check_config;
  auto* chk = app.add_subcommand("oracle-check", "Run the golden-transcript conformance probe");
  chk->add_option("--oracle", check_spec, "Oracle spec");
  chk->add_option("--config", check_config, "INI configuration file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_synthetic(n, n_bonafide, gen_seed, gen_prefix, gen_out);
    if (*att) return attack(aa);
    if (*uni) return universal(ua);
    if (*def) return defend(da);
    if (*dev) return defend_eval(model_path, eval_manifest, colors, eval_seed, eval_out);
    if (*chk) return oracle_check(check_spec, check_config);
  } catch (const cf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
