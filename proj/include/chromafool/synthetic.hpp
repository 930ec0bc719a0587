#pragma once

// Procedural face-like images: a soft ellipse on a tinted gradient, an
// identity-specific pattern of rings and blobs, and per-pixel texture noise.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "chromafool/image.hpp"
#include "chromafool/manifest.hpp"
#include "chromafool/oracle.hpp"
#include "chromafool/transforms.hpp"

namespace chromafool {

struct FaceSpec {
  struct Ring {
    double radius = 0.0;
    double width = 1.0;
    double amplitude = 0.0;
  };
  struct Blob {
    double x = 0.0;  // offset from the image center
    double y = 0.0;
    double sigma = 1.0;
    double amplitude = 0.0;
  };

  std::array<double, 3> tint{1.0, 1.0, 1.0};  // channel gains, largest is 1
  double face_level = 200.0;
  double background_level = 120.0;
  double gradient_angle = 0.0;  // radians
  double gradient_strength = 0.0;
  double face_rx = 80.0;
  double face_ry = 95.0;
  std::vector<Ring> rings;
  std::vector<Blob> blobs;
  double contrast = 1.0;  // scales every deviation from the mean gray level
  double noise_amplitude = 4.0;
  std::uint64_t noise_seed = 0;
};

// Draws a face whose tint is pulled from a skin-like band of chromaticities.
FaceSpec sample_face_spec(Rng& rng);

// Integer-mode kWorkingSize x kWorkingSize rendering.
Image render_face(const FaceSpec& spec, std::size_t size = kWorkingSize);

struct SyntheticOptions {
  std::size_t n = 100;
  std::size_t n_bonafide = 0;  // extra bonafide-labeled entries (defense data)
  std::uint64_t seed = 0;
  ColorGateParams colorgate;  // spoof images are rejection-sampled against it
  std::string prefix = "face";
};

struct SyntheticSample {
  std::string id;
  std::string identity;
  Label label = Label::Spoofing;
  Image image;
};

// Spoof samples are labeled Spoofing by the colorgate oracle. Bonafide samples
// have higher contrast and a warmer tint than spoofs, the cue the toy
// anti-spoofing classifier learns.
std::vector<SyntheticSample> synthesize(const SyntheticOptions& options);

// Writes <prefix>_NNN.png files and manifest.csv into out_dir.
Manifest generate_synthetic(const SyntheticOptions& options, const std::filesystem::path& out_dir);

}  // namespace chromafool
