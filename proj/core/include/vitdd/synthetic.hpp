#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "vitdd/image.hpp"

namespace vitdd {

/// Generation recipe for the synthetic desk-scale dataset. Driver images
/// carry a class-coded bright block on a noisy background; face images carry
/// an emotion-coded block and are also painted into the driver frame's
/// top-right corner so a detector crop reproduces them. Patterns are linearly
/// separable by construction.
struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 8;
  std::size_t num_emotions = 7;
  double faceless_fraction = 0.2;
  std::size_t num_drivers = 4;
  std::size_t driver_height = 16, driver_width = 16;
  std::size_t face_height = 8, face_width = 8;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t total_samples() const { return num_classes * samples_per_class; }
};

struct SyntheticResult {
  std::size_t samples = 0;
  std::size_t faceless = 0;
  std::filesystem::path manifest;
  std::filesystem::path annotations;
  std::filesystem::path drivers;
};

/// Writes driver/<id>.ppm, face/<id>.ppm (for faced samples), manifest.csv,
/// drivers.csv and annotations.csv into out_dir. Fully determined by spec.
SyntheticResult generate_synthetic(const SyntheticSpec& spec,
                                   const std::filesystem::path& out_dir);

/// Cell (row, col) of the class block on the 4x4 layout grid. The top-right
/// 2x2 quadrant is reserved for the embedded face.
std::pair<std::size_t, std::size_t> distraction_cell(std::size_t cls);

/// Cell (row, col) of the emotion block on the face's 2x4 grid.
std::pair<std::size_t, std::size_t> emotion_cell(std::size_t emotion);

/// Exact spreading rule: sample index i is face-less iff
/// floor((i+1)*f) > floor(i*f), giving floor(n*f) face-less samples out of n.
bool faceless_at(std::size_t index, double fraction);

/// Where the face is painted inside the driver frame (top-right corner).
PixelBox face_box(const SyntheticSpec& spec);

/// Deterministic synthetic images, exposed for oracle tests.
Image synth_face_image(const SyntheticSpec& spec, std::size_t sample_index, int emotion);
Image synth_driver_image(const SyntheticSpec& spec, std::size_t sample_index, int cls,
                         const Image* face);

}  // namespace vitdd
