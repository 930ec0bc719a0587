#include "chromafool/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "chromafool/errors.hpp"
#include "chromafool/image_io.hpp"

namespace chromafool {
namespace {

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

std::array<double, 3> gains_from_chroma(double r, double g) {
  const std::array<double, 3> c{r, g, 1.0 - r - g};
  const double m = std::max({c[0], c[1], c[2]});
  return {c[0] / m, c[1] / m, c[2] / m};
}

// Spoofs are washed out and cool; bonafide faces are crisp and warm.
void style_for(Label label, FaceSpec& spec, Rng& rng) {
  if (label == Label::Spoofing) {
    spec.tint = gains_from_chroma(uniform_in(rng, {0.34, 0.42}), uniform_in(rng, {0.31, 0.36}));
    spec.contrast = uniform_in(rng, {0.5, 0.75});
  } else {
    spec.tint = gains_from_chroma(uniform_in(rng, {0.38, 0.46}), uniform_in(rng, {0.30, 0.34}));
    spec.contrast = uniform_in(rng, {0.95, 1.25});
  }
}

}  // namespace

FaceSpec sample_face_spec(Rng& rng) {
  FaceSpec s;
  s.face_level = uniform_in(rng, {170.0, 215.0});
  s.background_level = uniform_in(rng, {90.0, 150.0});
  s.gradient_angle = uniform_in(rng, {0.0, 2.0 * std::numbers::pi});
  s.gradient_strength = uniform_in(rng, {0.0, 30.0});
  s.face_rx = uniform_in(rng, {62.0, 88.0});
  s.face_ry = s.face_rx * uniform_in(rng, {1.1, 1.3});
  for (int k = 0; k < 3; ++k) {
    FaceSpec::Ring ring;
    ring.radius = uniform_in(rng, {8.0, 0.9 * s.face_rx});
    ring.width = uniform_in(rng, {6.0, 14.0});
    ring.amplitude = uniform_in(rng, {15.0, 45.0}) * (uniform_in(rng, {0.0, 1.0}) < 0.5 ? -1.0 : 1.0);
    s.rings.push_back(ring);
  }
  const double eye_x = uniform_in(rng, {22.0, 34.0});
  const double eye_y = -uniform_in(rng, {12.0, 28.0});
  const double eye_sigma = uniform_in(rng, {5.0, 9.0});
  const double eye_amp = -uniform_in(rng, {30.0, 60.0});
  s.blobs.push_back({-eye_x, eye_y, eye_sigma, eye_amp});
  s.blobs.push_back({eye_x, eye_y, eye_sigma, eye_amp});
  s.blobs.push_back({0.0, uniform_in(rng, {30.0, 50.0}), uniform_in(rng, {6.0, 10.0}), -uniform_in(rng, {20.0, 40.0})});
  for (int k = 0; k < 2; ++k) {
    FaceSpec::Blob b;
    b.x = uniform_in(rng, {-0.6, 0.6}) * s.face_rx;
    b.y = uniform_in(rng, {-0.6, 0.6}) * s.face_ry;
    b.sigma = uniform_in(rng, {8.0, 16.0});
    b.amplitude = uniform_in(rng, {15.0, 35.0}) * (uniform_in(rng, {0.0, 1.0}) < 0.5 ? -1.0 : 1.0);
    s.blobs.push_back(b);
  }
  s.tint = gains_from_chroma(uniform_in(rng, {0.34, 0.42}), uniform_in(rng, {0.31, 0.36}));
  s.noise_amplitude = uniform_in(rng, {3.0, 6.0});
  s.noise_seed = rng();
  return s;
}

Image render_face(const FaceSpec& spec, std::size_t size) {
  Image img(size, size, ColorMode::Integer);
  const double scale = static_cast<double>(size) / static_cast<double>(kWorkingSize);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  const double ca = std::cos(spec.gradient_angle), sa = std::sin(spec.gradient_angle);
  Rng noise(spec.noise_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto r = img.plane(Channel::R), g = img.plane(Channel::G), b = img.plane(Channel::B);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = (static_cast<double>(x) - c) / scale;
      const double dy = (static_cast<double>(y) - c) / scale;
      const double e = std::hypot(dx / spec.face_rx, dy / spec.face_ry);
      const double m = smoothstep((1.08 - e) / 0.16);
      const double bg = spec.background_level + spec.gradient_strength * (dx * ca + dy * sa) / 128.0;
      double pattern = 0.0;
      const double rad = std::hypot(dx, dy);
      for (const auto& ring : spec.rings) {
        const double t = (rad - ring.radius) / ring.width;
        pattern += ring.amplitude * std::exp(-0.5 * t * t);
      }
      for (const auto& blob : spec.blobs) {
        const double d2 = (dx - blob.x) * (dx - blob.x) + (dy - blob.y) * (dy - blob.y);
        pattern += blob.amplitude * std::exp(-0.5 * d2 / (blob.sigma * blob.sigma));
      }
      const double base = bg * (1.0 - m) + (spec.face_level + pattern) * m;
      const double gray = std::clamp(spec.face_level + spec.contrast * (base - spec.face_level), 40.0, 250.0) +
                          spec.noise_amplitude * unit(noise);
      const std::size_t i = y * size + x;
      r[i] = std::clamp(std::round(spec.tint[0] * gray), 0.0, 255.0);
      g[i] = std::clamp(std::round(spec.tint[1] * gray), 0.0, 255.0);
      b[i] = std::clamp(std::round(spec.tint[2] * gray), 0.0, 255.0);
    }
  }
  return img;
}

std::vector<SyntheticSample> synthesize(const SyntheticOptions& options) {
  if (options.n + options.n_bonafide == 0) throw InvalidArgument("synthetic dataset needs at least one image");
  options.colorgate.validate();
  Rng rng(options.seed);
  std::vector<SyntheticSample> out;
  const std::size_t total = options.n + options.n_bonafide;
  for (std::size_t i = 0; i < total; ++i) {
    const Label label = i < options.n ? Label::Spoofing : Label::Bonafide;
    char id[64];
    std::snprintf(id, sizeof id, "%s_%03zu", options.prefix.c_str(), i);
    char identity[64];
    std::snprintf(identity, sizeof identity, "id_%03zu", i);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error("could not draw a spoof-labeled synthetic face");
      FaceSpec spec = sample_face_spec(rng);
      style_for(label, spec, rng);
      Image img = render_face(spec);
      if (label == Label::Spoofing && colorgate_verdict(img, options.colorgate).label != Label::Spoofing) continue;
      out.push_back({id, identity, label, std::move(img)});
      break;
    }
  }
  return out;
}

Manifest generate_synthetic(const SyntheticOptions& options, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  Manifest m;
  m.base_dir = out_dir;
  for (const auto& s : synthesize(options)) {
    const std::string file = s.id + ".png";
    save_image(s.image, out_dir / file);
    m.entries.push_back({file, s.identity, s.label});
  }
  write_manifest(m, out_dir / "manifest.csv");
  return m;
}

}  // namespace chromafool
