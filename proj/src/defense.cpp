#include "chromafool/defense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "chromafool/errors.hpp"

namespace chromafool::defense {
namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double target(Label y) { return y == Label::Bonafide ? 1.0 : 0.0; }

void check_both_labels(std::span<const Label> y) {
  const bool pos = std::ranges::find(y, Label::Bonafide) != y.end();
  const bool neg = std::ranges::find(y, Label::Spoofing) != y.end();
  if (!pos || !neg) throw InvalidArgument("both labels must be present");
}

std::vector<double> flipped_gray(const Image& img, bool flip) {
  GrayImage g = grayscale(img);
  if (flip) {
    for (std::size_t y = 0; y < g.height; ++y) {
      auto row = g.values.begin() + static_cast<std::ptrdiff_t>(y * g.width);
      std::reverse(row, row + static_cast<std::ptrdiff_t>(g.width));
    }
  }
  return std::move(g.values);
}

double perturbed_value(double a, double gray, double noise) {
  return std::clamp(std::clamp(a * gray, 0.0, 255.0) + noise, 0.0, 255.0);
}

void descend(ToyClassifier& model, const Gradient& g, double lr) {
  for (std::size_t k = 0; k < kFeatureCount; ++k) model.weights[k] -= lr * g.weights[k];
  model.bias -= lr * g.bias;
}

std::vector<Features> features_of(std::span<const DefenseSample> data) {
  std::vector<Features> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(feature_map(s.image));
  return out;
}

std::vector<Label> labels_of(std::span<const DefenseSample> data) {
  std::vector<Label> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.label);
  return out;
}

}  // namespace

Features plane_features(const double* r, const double* g, const double* b, std::size_t n) {
  Features f{};
  if (n == 0) return f;
  const auto count = static_cast<double>(n);
  double sr = 0.0, sg = 0.0, sb = 0.0, sgray = 0.0;
  std::size_t saturated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sr += r[i];
    sg += g[i];
    sb += b[i];
    sgray += 0.3 * r[i] + 0.59 * g[i] + 0.11 * b[i];
    for (const double v : {r[i], g[i], b[i]}) saturated += (v == 0.0 || v == 255.0) ? 1 : 0;
  }
  const double mr = sr / count, mg = sg / count, mb = sb / count, mgray = sgray / count;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 0.3 * r[i] + 0.59 * g[i] + 0.11 * b[i] - mgray;
    ss += d * d;
  }
  const double s = mr + mg + mb;
  f[0] = mr / 255.0;
  f[1] = mg / 255.0;
  f[2] = mb / 255.0;
  f[3] = s > 0.0 ? mr / s : 1.0 / 3.0;
  f[4] = s > 0.0 ? mg / s : 1.0 / 3.0;
  f[5] = mgray / 255.0;
  f[6] = std::min(1.0, std::sqrt(ss / count) / 127.5);
  f[7] = static_cast<double>(saturated) / (3.0 * count);
  return f;
}

Features feature_map(const Image& img) {
  return plane_features(img.plane(Channel::R).data(), img.plane(Channel::G).data(), img.plane(Channel::B).data(),
                        img.pixel_count());
}

double ToyClassifier::score(const Features& f) const {
  double s = bias;
  for (std::size_t k = 0; k < kFeatureCount; ++k) s += weights[k] * f[k];
  return s;
}

double ToyClassifier::predict(const Features& f) const { return sigmoid(score(f)); }

std::string model_to_json(const ToyClassifier& model) {
  nlohmann::json j;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["feature_map_version"] = kFeatureMapVersion;
  return j.dump(2);
}

ToyClassifier model_from_json(std::string_view text) {
  ToyClassifier m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("feature_map_version").get<int>() != kFeatureMapVersion) {
      throw FormatError("unsupported feature_map_version");
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != kFeatureCount) throw FormatError("model needs exactly 8 weights");
    std::ranges::copy(w, m.weights.begin());
    m.bias = j.at("bias").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
  for (const double w : m.weights) {
    if (!std::isfinite(w)) throw FormatError("model weights must be finite");
  }
  if (!std::isfinite(m.bias)) throw FormatError("model bias must be finite");
  return m;
}

void save_model(const ToyClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

ToyClassifier load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError(path.string() + " does not exist");
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

DefenseSample prepare_sample(const Image& img, Label label, std::size_t size) {
  Image small = resize_area(img, size, size);
  small.set_mode(ColorMode::Continuous);
  return {std::move(small), label};
}

double mean_loss(const ToyClassifier& model, std::span<const Features> x, std::span<const Label> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = model.score(x[i]);
    total += softplus(s) - target(y[i]) * s;
  }
  return total / static_cast<double>(x.size());
}

Gradient loss_gradient(const ToyClassifier& model, std::span<const Features> x, std::span<const Label> y) {
  Gradient g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = sigmoid(model.score(x[i])) - target(y[i]);
    for (std::size_t k = 0; k < kFeatureCount; ++k) g.weights[k] += d * x[i][k];
    g.bias += d;
  }
  const auto n = static_cast<double>(x.size());
  for (double& w : g.weights) w /= n;
  g.bias /= n;
  return g;
}

ToyClassifier initial_model(std::uint64_t seed, double init_scale) {
  Rng rng(seed);
  const Interval iv{-init_scale, init_scale};
  ToyClassifier m;
  for (double& w : m.weights) w = uniform_in(rng, iv);
  m.bias = uniform_in(rng, iv);
  return m;
}

TrainResult train_plain(std::span<const DefenseSample> data, const PlainOptions& options) {
  const std::vector<Label> y = labels_of(data);
  check_both_labels(y);
  if (!(options.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  const std::vector<Features> x = features_of(data);
  TrainResult r{initial_model(options.seed, options.init_scale), {}};
  r.loss_history.reserve(options.epochs);
  for (std::size_t e = 0; e < options.epochs; ++e) {
    descend(r.model, loss_gradient(r.model, x, y), options.learning_rate);
    r.loss_history.push_back(mean_loss(r.model, x, y));
  }
  return r;
}

TrDraw draw_tr(std::size_t pixel_count, double amplitude, Rng& rng) {
  TrDraw d;
  d.flip = uniform_in(rng, {0.0, 1.0}) < 0.5;
  d.noise.resize(3 * pixel_count);
  for (double& v : d.noise) v = uniform_in(rng, {-amplitude, amplitude});
  return d;
}

Image perturb(const Image& img, const ColorFilter& color, const TrDraw& tr) {
  const std::size_t n = img.pixel_count();
  if (tr.noise.size() != 3 * n) throw InvalidArgument("t_r draw does not fit the image");
  const std::vector<double> gray = flipped_gray(img, tr.flip);
  Image out(img.height(), img.width(), ColorMode::Continuous);
  const auto a = color.as_array();
  for (std::size_t c = 0; c < 3; ++c) {
    auto dst = out.plane(c);
    const double* noise = tr.noise.data() + c * n;
    for (std::size_t i = 0; i < n; ++i) dst[i] = perturbed_value(a[c], gray[i], noise[i]);
  }
  return out;
}

Image colorize(const Image& img, const ColorFilter& color) { return apply_filter(img, color, ColorMode::Continuous); }

InnerMax inner_max_color(const Decision& decide, std::span<const DefenseSample> batch, std::span<const TrDraw> draws,
                         std::size_t resolution) {
  if (resolution < 2) throw InvalidArgument("grid resolution must be at least 2");
  if (draws.size() != batch.size()) throw InvalidArgument("one t_r draw per sample is required");
  std::vector<double> grid(resolution);
  for (std::size_t k = 0; k < resolution; ++k) grid[k] = static_cast<double>(k) / static_cast<double>(resolution - 1);

  // planes[s][c][k] holds channel c of sample s perturbed with grid value k.
  std::vector<std::vector<std::vector<std::vector<double>>>> planes(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Image& img = batch[s].image;
    const std::size_t n = img.pixel_count();
    if (draws[s].noise.size() != 3 * n) throw InvalidArgument("t_r draw does not fit the image");
    const std::vector<double> gray = flipped_gray(img, draws[s].flip);
    planes[s].assign(3, std::vector<std::vector<double>>(resolution, std::vector<double>(n)));
    for (std::size_t c = 0; c < 3; ++c) {
      const double* noise = draws[s].noise.data() + c * n;
      for (std::size_t k = 0; k < resolution; ++k) {
        for (std::size_t i = 0; i < n; ++i) planes[s][c][k][i] = perturbed_value(grid[k], gray[i], noise[i]);
      }
    }
  }

  InnerMax best;
  bool first = true;
  for (std::size_t ir = 0; ir < resolution; ++ir) {
    for (std::size_t ig = 0; ig < resolution; ++ig) {
      for (std::size_t ib = 0; ib < resolution; ++ib) {
        std::size_t wrong = 0;
        for (std::size_t s = 0; s < batch.size(); ++s) {
          const Features f = plane_features(planes[s][0][ir].data(), planes[s][1][ig].data(),
                                            planes[s][2][ib].data(), batch[s].image.pixel_count());
          wrong += decide(f) != batch[s].label ? 1 : 0;
        }
        ++best.evaluations;
        if (first || wrong > best.misclassified) {
          first = false;
          best.misclassified = wrong;
          best.color = {grid[ir], grid[ig], grid[ib]};
        }
      }
    }
  }
  return best;
}

InnerMax inner_max_color(const ToyClassifier& model, std::span<const DefenseSample> batch,
                         std::span<const TrDraw> draws, std::size_t resolution) {
  return inner_max_color([&](const Features& f) { return model.classify(f); }, batch, draws, resolution);
}

TrainResult train_colorat(std::span<const DefenseSample> data, const ColorAtOptions& options) {
  const std::vector<Label> y = labels_of(data);
  check_both_labels(y);
  if (options.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (!(options.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  const std::vector<Features> x = features_of(data);
  TrainResult r{initial_model(options.seed, options.init_scale), {}};
  Rng shuffle_rng(options.seed ^ 0x5DEECE66DULL);
  Rng tr_rng(options.seed ^ 0xC0105A7ULL);

  std::vector<std::size_t> order(data.size());
  for (std::size_t e = 0; e < options.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      std::ranges::sort(idx);
      std::vector<Features> xb;
      std::vector<Label> yb;
      std::vector<DefenseSample> batch;
      for (const std::size_t i : idx) {
        xb.push_back(x[i]);
        yb.push_back(y[i]);
        if (options.inner_search) batch.push_back(data[i]);
      }
      const Gradient clean = loss_gradient(r.model, xb, yb);
      Gradient pert = clean;
      if (options.inner_search) {
        std::vector<TrDraw> draws;
        for (const auto& s : batch) draws.push_back(draw_tr(s.image.pixel_count(), options.noise_amplitude, tr_rng));
        const InnerMax worst = inner_max_color(r.model, batch, draws, options.grid_resolution);
        std::vector<Features> xp;
        for (std::size_t s = 0; s < batch.size(); ++s) xp.push_back(feature_map(perturb(batch[s].image, worst.color, draws[s])));
        pert = loss_gradient(r.model, xp, yb);
      }
      Gradient mixed;
      for (std::size_t k = 0; k < kFeatureCount; ++k) mixed.weights[k] = 0.5 * (clean.weights[k] + pert.weights[k]);
      mixed.bias = 0.5 * (clean.bias + pert.bias);
      descend(r.model, mixed, options.learning_rate);
    }
    r.loss_history.push_back(mean_loss(r.model, x, y));
  }
  return r;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  check_both_labels(labels);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::ranges::sort(idx, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of positive ranks with ties sharing their mean rank.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == Label::Bonafide) {
        rank_sum += mean_rank;
        ++pos;
      }
    }
    i = j;
  }
  const auto np = static_cast<double>(pos);
  const auto nn = static_cast<double>(scores.size() - pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

DefenseMetrics defense_metrics(const ToyClassifier& model, std::span<const DefenseSample> clean, std::size_t n_colors,
                               std::uint64_t seed) {
  if (clean.empty()) throw InvalidArgument("defense evaluation needs samples");
  DefenseMetrics m;
  Rng rng(seed);
  for (std::size_t k = 0; k < n_colors; ++k) {
    ColorFilter c;
    c.r = uniform_in(rng, {0.0, 1.0});
    c.g = uniform_in(rng, {0.0, 1.0});
    c.b = uniform_in(rng, {0.0, 1.0});
    m.colors.push_back(c);
  }
  std::vector<double> scores;
  std::vector<Label> labels;
  for (const auto& s : clean) {
    scores.push_back(model.predict(s.image));
    labels.push_back(s.label);
  }
  m.cauc = auc(scores, labels);
  std::size_t spoofs = 0, missed = 0;
  for (const auto& color : m.colors) {
    for (const auto& s : clean) {
      const double p = model.predict(colorize(s.image, color));
      scores.push_back(p);
      labels.push_back(s.label);
      if (s.label == Label::Spoofing) {
        ++spoofs;
        missed += p >= 0.5 ? 1 : 0;
      }
    }
  }
  m.ccauc = auc(scores, labels);
  m.dmr = spoofs == 0 ? 0.0 : static_cast<double>(missed) / static_cast<double>(spoofs);
  return m;
}

}  // namespace chromafool::defense
