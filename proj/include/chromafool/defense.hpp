#pragma once

// ColorAT: adversarial training of a small logistic anti-spoofing model whose
// inner step searches a color grid for the filter that fools the current
// minibatch the most. Also the cAUC / ccAUC / dMR defense metrics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/oracle.hpp"
#include "chromafool/transforms.hpp"

namespace chromafool::defense {

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr int kFeatureMapVersion = 1;
// Defense images are area-downsampled to this square size before anything
// else happens to them.
inline constexpr std::size_t kDefenseSize = 16;

// mean R, G, B / 255; chroma r, g; gray mean / 255; gray std / 127.5;
// saturated fraction. Every entry lies in [0, 1].
using Features = std::array<double, kFeatureCount>;

Features plane_features(const double* r, const double* g, const double* b, std::size_t n);
Features feature_map(const Image& img);

struct ToyClassifier {
  Features weights{};
  double bias = 0.0;

  double score(const Features& f) const;    // affine
  double predict(const Features& f) const;  // probability of Bonafide
  double predict(const Image& img) const { return predict(feature_map(img)); }
  Label classify(const Features& f) const { return predict(f) >= 0.5 ? Label::Bonafide : Label::Spoofing; }

  bool operator==(const ToyClassifier&) const = default;
};

// {"weights": [8 numbers], "bias": number, "feature_map_version": 1}
std::string model_to_json(const ToyClassifier& model);
// Throws FormatError on malformed documents or a different feature map version.
ToyClassifier model_from_json(std::string_view text);
void save_model(const ToyClassifier& model, const std::filesystem::path& path);
ToyClassifier load_model(const std::filesystem::path& path);

struct DefenseSample {
  Image image;  // Continuous mode, kDefenseSize square
  Label label = Label::Spoofing;
};

DefenseSample prepare_sample(const Image& img, Label label, std::size_t size = kDefenseSize);

// Mean binary cross-entropy and its gradient over a set of feature vectors.
struct Gradient {
  Features weights{};
  double bias = 0.0;
};
double mean_loss(const ToyClassifier& model, std::span<const Features> x, std::span<const Label> y);
Gradient loss_gradient(const ToyClassifier& model, std::span<const Features> x, std::span<const Label> y);

struct TrainResult {
  ToyClassifier model;
  std::vector<double> loss_history;  // full-data loss after every epoch
};

// Weights and bias start uniform in [-init_scale, init_scale].
ToyClassifier initial_model(std::uint64_t seed, double init_scale);

struct PlainOptions {
  std::size_t epochs = 3000;
  double learning_rate = 0.4;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
};

// Full-batch gradient descent. Throws InvalidArgument on a single-class set.
TrainResult train_plain(std::span<const DefenseSample> data, const PlainOptions& options);

// The training-time transformation: optional horizontal flip plus additive
// uniform noise, applied after colorization.
struct TrDraw {
  bool flip = false;
  std::vector<double> noise;  // 3 * pixel count, planar
};
TrDraw draw_tr(std::size_t pixel_count, double amplitude, Rng& rng);

// clip(clip(a_c * gray) + noise_c) with gray taken from the (flipped) input.
Image perturb(const Image& img, const ColorFilter& color, const TrDraw& tr);
// Continuous colorization with no flip or noise.
Image colorize(const Image& img, const ColorFilter& color);

using Decision = std::function<Label(const Features&)>;

struct InnerMax {
  ColorFilter color;
  std::size_t misclassified = 0;
  std::size_t evaluations = 0;
};

// Exhaustive search over {0, 1/(res-1), ..., 1}^3 for the color maximizing
// the number of misclassified perturbed samples; ties keep the
// lexicographically smallest color.
InnerMax inner_max_color(const Decision& decide, std::span<const DefenseSample> batch,
                         std::span<const TrDraw> draws, std::size_t resolution = 11);
InnerMax inner_max_color(const ToyClassifier& model, std::span<const DefenseSample> batch,
                         std::span<const TrDraw> draws, std::size_t resolution = 11);

struct ColorAtOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 0.4;
  double init_scale = 0.01;
  std::size_t grid_resolution = 11;
  double noise_amplitude = 5.0;
  // Off: the perturbed batch is the clean batch (no color, no t_r).
  bool inner_search = true;
  std::uint64_t seed = 0;
};

// Per minibatch (indices drawn from a seeded shuffle, sorted within the
// batch): inner-max color under fresh t_r draws, then one step along the mean
// of the clean-batch and perturbed-batch gradients.
TrainResult train_colorat(std::span<const DefenseSample> data, const ColorAtOptions& options);

// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
// ties counted half. Throws InvalidArgument unless both labels occur.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct DefenseMetrics {
  double cauc = 0.0;
  double ccauc = 0.0;
  double dmr = 0.0;
  std::vector<ColorFilter> colors;
};

// Colors are drawn uniformly from [0,1]^3. Every clean sample is colorized
// with every color; cAUC uses the clean scores, ccAUC clean plus colorized,
// dMR the fraction of colorized spoofs classified Bonafide.
DefenseMetrics defense_metrics(const ToyClassifier& model, std::span<const DefenseSample> clean, std::size_t n_colors,
                               std::uint64_t seed);

}  // namespace chromafool::defense
