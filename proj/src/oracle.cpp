#include "chromafool/oracle.hpp"

#include <cmath>
#include <numeric>

#include "chromafool/errors.hpp"
#include "chromafool/external_oracle.hpp"
#include "chromafool/kernels.hpp"

namespace chromafool {

QueryLedger::QueryLedger(std::uint64_t limit) : limit_(limit) {
  if (limit == 0) throw InvalidArgument("query limit must be positive");
}

std::uint64_t QueryLedger::headroom() const {
  const std::uint64_t c = count_.load();
  const std::uint64_t l = limit_.load();
  return c >= l ? 0 : l - c;
}

void QueryLedger::acquire() {
  std::uint64_t c = count_.load();
  do {
    if (c >= limit_.load()) {
      throw QueryLimitExhausted("query limit of " + std::to_string(limit_.load()) + " reached");
    }
  } while (!count_.compare_exchange_weak(c, c + 1));
}

void QueryLedger::refund() { --count_; }

PipelineVerdict OracleSession::classify(const Image& img) {
  ledger_.acquire();
  try {
    return oracle_->query(img);
  } catch (const TransportError&) {
    ledger_.refund();
    throw;
  }
}

// ---------------------------------------------------------------------------

std::vector<double> make_template(const Image& img) {
  const GrayImage small = resize_area(grayscale(img), kTemplateSize, kTemplateSize);
  std::vector<double> v = small.values;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  const double norm = std::sqrt(kernels::active().dot(v.data(), v.data(), v.size()));
  if (norm <= 1e-12) {
    std::ranges::fill(v, 0.0);
  } else {
    for (double& x : v) x /= norm;
  }
  return v;
}

void Gallery::enroll(std::string identity, const Image& img) {
  enroll_template(std::move(identity), make_template(img));
}

void Gallery::enroll_template(std::string identity, std::vector<double> normalized) {
  if (identity.empty()) throw InvalidArgument("identity must be non-empty");
  if (normalized.size() != kTemplateSize * kTemplateSize) throw InvalidArgument("template must be 64x64");
  ids_.push_back(std::move(identity));
  templates_.push_back(std::move(normalized));
}

std::optional<MatchResult> Gallery::best(const Image& img) const {
  if (ids_.empty()) return std::nullopt;
  const std::vector<double> probe = make_template(img);
  const auto& k = kernels::active();
  std::size_t best_index = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    const double s = k.dot(probe.data(), templates_[i].data(), probe.size());
    if (s > best_score) {
      best_score = s;
      best_index = i;
    }
  }
  return MatchResult{ids_[best_index], best_score};
}

std::optional<std::string> match_identity(const Image& img, const Gallery& gallery, double threshold) {
  const auto best = gallery.best(img);
  if (!best || best->score < threshold) return std::nullopt;
  return best->identity;
}

// ---------------------------------------------------------------------------

void ColorGateParams::validate() const {
  double sum = 0.0;
  for (const double c : secret_chroma) {
    if (!(c >= 0.0)) throw InvalidArgument("secret chroma components must be non-negative");
    sum += c;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("secret chroma must sum to 1");
  if (!(tolerance > 0.0)) throw InvalidArgument("colorgate tolerance must be positive");
  if (!(match_threshold >= -1.0 && match_threshold <= 1.0)) {
    throw InvalidArgument("match threshold must be in [-1, 1]");
  }
}

ImageStatistics image_statistics(const Image& img) {
  const auto& k = kernels::active();
  const auto n = static_cast<double>(img.pixel_count());
  ImageStatistics s;
  std::size_t extreme = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto p = img.plane(c);
    const auto ps = k.plane_stats(p.data(), p.size());
    s.channel_mean[c] = ps.sum / n;
    extreme += ps.extreme;
  }
  s.gray_mean = 0.3 * s.channel_mean[0] + 0.59 * s.channel_mean[1] + 0.11 * s.channel_mean[2];
  s.saturated_fraction = static_cast<double>(extreme) / (3.0 * n);
  return s;
}

PipelineVerdict colorgate_verdict(const Image& img, const ColorGateParams& params, const Gallery* gallery) {
  const ImageStatistics st = image_statistics(img);
  PipelineVerdict v;
  v.quality = std::max(0.0, 1.0 - std::abs(st.gray_mean - 128.0) / 128.0) * (1.0 - st.saturated_fraction);
  const double s = st.channel_mean[0] + st.channel_mean[1] + st.channel_mean[2];
  if (s > 0.0) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double diff = st.channel_mean[c] / s - params.secret_chroma[c];
      d2 += diff * diff;
    }
    v.label = std::sqrt(d2) < params.tolerance ? Label::Bonafide : Label::Spoofing;
  }
  // The matcher only runs on images that passed anti-spoofing.
  if (gallery != nullptr && v.label == Label::Bonafide) v.match_id = match_identity(img, *gallery, params.match_threshold);
  return v;
}

ColorGateOracle::ColorGateOracle(ColorGateParams params, std::shared_ptr<const Gallery> gallery)
    : params_(params), gallery_(std::move(gallery)) {
  params_.validate();
}

PipelineVerdict ColorGateOracle::query(const Image& img) { return colorgate_verdict(img, params_, gallery_.get()); }

// ---------------------------------------------------------------------------

OracleSpec OracleSpec::parse(const std::string& text) {
  OracleSpec spec;
  auto strip_quotes = [](std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
      s = s.substr(1, s.size() - 2);
    }
    return s;
  };
  if (text == "builtin:colorgate") {
    spec.kind = Kind::Colorgate;
  } else if (text == "builtin:always-spoof") {
    spec.kind = Kind::AlwaysSpoof;
  } else if (text.rfind("exec:", 0) == 0 && text.size() > 5) {
    spec.kind = Kind::Exec;
    spec.target = strip_quotes(text.substr(5));
  } else if (text.rfind("http:", 0) == 0 && text.size() > 5) {
    spec.kind = Kind::Http;
    spec.target = text.substr(5);
    // Accept both http:localhost:8080 and http:http://localhost:8080.
    if (spec.target.rfind("http://", 0) != 0 && spec.target.rfind("https://", 0) != 0) {
      spec.target = "http://" + spec.target;
    }
  } else {
    throw InvalidArgument("unrecognized oracle spec '" + text +
                          "' (expected builtin:colorgate, builtin:always-spoof, exec:<cmd> or http:<url>)");
  }
  if ((spec.kind == Kind::Exec || spec.kind == Kind::Http) && spec.target.empty()) {
    throw InvalidArgument("oracle spec '" + text + "' has an empty target");
  }
  return spec;
}

std::string OracleSpec::to_string() const {
  switch (kind) {
    case Kind::Colorgate: return "builtin:colorgate";
    case Kind::AlwaysSpoof: return "builtin:always-spoof";
    case Kind::Exec: return "exec:" + target;
    case Kind::Http: return "http:" + target;
  }
  return {};
}

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec, const OracleOptions& options) {
  switch (spec.kind) {
    case OracleSpec::Kind::Colorgate:
      return std::make_unique<ColorGateOracle>(options.colorgate, options.gallery);
    case OracleSpec::Kind::AlwaysSpoof:
      return std::make_unique<AlwaysSpoofOracle>();
    case OracleSpec::Kind::Exec:
      return std::make_unique<ExecOracle>(spec.target, options.transport);
    case OracleSpec::Kind::Http:
      return std::make_unique<HttpOracle>(spec.target, options.transport);
  }
  throw InvalidArgument("unknown oracle kind");
}

OracleFactory oracle_factory(const OracleSpec& spec, OracleOptions options) {
  return [spec, options = std::move(options)] { return make_oracle(spec, options); };
}

}  // namespace chromafool
