#include "vitdd/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vitdd/classes.hpp"
#include "vitdd/errors.hpp"
#include "vitdd/manifest.hpp"
#include "vitdd/rng.hpp"

namespace vitdd {

namespace {

constexpr std::uint8_t kBlockValue = 235;
constexpr std::uint8_t kNoiseBase = 16;
constexpr std::uint64_t kNoiseSpan = 64;  // noise in [16, 80)

// 4x4 layout grid with the top-right 2x2 quadrant (rows 0-1, cols 2-3)
// reserved for the embedded face.
constexpr std::pair<std::size_t, std::size_t> kClassCells[10] = {
    {0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}, {2, 3}, {3, 0}, {3, 1},
};

void fill_noise(Image& img, Rng& rng) {
  for (std::uint8_t& p : img.pixels) {
    p = static_cast<std::uint8_t>(kNoiseBase + rng.below(kNoiseSpan));
  }
}

void paint_block(Image& img, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
  for (std::size_t y = y0; y < y0 + h; ++y)
    for (std::size_t x = x0; x < x0 + w; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = kBlockValue;
}

std::string sample_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%05zu", index);
  return buf;
}

std::string driver_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%02zu", index);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes == 0 || samples_per_class == 0) {
    throw DataError("synthetic spec: sample counts must be positive");
  }
  if (num_classes > kNumDistractionClasses) {
    throw DataError("synthetic spec: at most 10 distraction classes");
  }
  if (num_emotions == 0 || num_emotions > 7) {
    throw DataError("synthetic spec: emotions must be in [1, 7]");
  }
  if (faceless_fraction < 0.0 || faceless_fraction > 1.0) {
    throw DataError("synthetic spec: faceless fraction outside [0, 1]");
  }
  if (num_drivers == 0) throw DataError("synthetic spec: need at least one driver id");
  if (driver_height % 4 != 0 || driver_width % 4 != 0) {
    throw DataError("synthetic spec: driver resolution must be divisible by 4");
  }
  if (face_height % 2 != 0 || face_width % 4 != 0) {
    throw DataError("synthetic spec: face resolution must be divisible by 2x4 cells");
  }
  if (face_height > driver_height / 2 || face_width > driver_width / 2) {
    throw DataError("synthetic spec: face must fit the driver frame's top-right quadrant");
  }
}

std::pair<std::size_t, std::size_t> distraction_cell(std::size_t cls) {
  if (cls >= 10) throw LabelError("distraction class " + std::to_string(cls) + " out of range");
  return kClassCells[cls];
}

std::pair<std::size_t, std::size_t> emotion_cell(std::size_t emotion) {
  if (emotion >= 7) throw LabelError("emotion class " + std::to_string(emotion) + " out of range");
  return {emotion / 4, emotion % 4};
}

bool faceless_at(std::size_t index, double fraction) {
  const double a = std::floor(static_cast<double>(index) * fraction);
  const double b = std::floor(static_cast<double>(index + 1) * fraction);
  return b > a;
}

PixelBox face_box(const SyntheticSpec& spec) {
  return PixelBox{spec.driver_width - spec.face_width, 0, spec.face_width, spec.face_height};
}

Image synth_face_image(const SyntheticSpec& spec, std::size_t sample_index, int emotion) {
  Image img(spec.face_width, spec.face_height);
  Rng rng = Rng::derive(spec.seed, "face", sample_index);
  fill_noise(img, rng);
  auto [row, col] = emotion_cell(static_cast<std::size_t>(emotion));
  const std::size_t ch = spec.face_height / 2, cw = spec.face_width / 4;
  paint_block(img, row * ch, col * cw, ch, cw);
  return img;
}

Image synth_driver_image(const SyntheticSpec& spec, std::size_t sample_index, int cls,
                         const Image* face) {
  Image img(spec.driver_width, spec.driver_height);
  Rng rng = Rng::derive(spec.seed, "driver", sample_index);
  fill_noise(img, rng);
  auto [row, col] = distraction_cell(static_cast<std::size_t>(cls));
  const std::size_t ch = spec.driver_height / 4, cw = spec.driver_width / 4;
  paint_block(img, row * ch, col * cw, ch, cw);
  if (face) {
    const PixelBox box = face_box(spec);
    for (std::size_t y = 0; y < box.h; ++y)
      for (std::size_t x = 0; x < box.w; ++x)
        for (std::size_t c = 0; c < 3; ++c) img.at(box.y + y, box.x + x, c) = face->at(y, x, c);
  }
  return img;
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec,
                                   const std::filesystem::path& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "driver");
  fs::create_directories(out_dir / "face");

  std::vector<ManifestRecord> records;
  std::map<std::string, std::string> driver_map;
  std::ofstream ann(out_dir / "annotations.csv", std::ios::binary | std::ios::trunc);
  if (!ann) throw DataError("cannot write annotations in " + out_dir.string());

  const PixelBox box = face_box(spec);
  std::size_t faceless_count = 0;
  std::size_t faced_seen = 0;
  for (std::size_t cls = 0; cls < spec.num_classes; ++cls) {
    for (std::size_t j = 0; j < spec.samples_per_class; ++j) {
      const std::size_t index = cls * spec.samples_per_class + j;
      const std::string id = sample_name(index);
      const bool faceless = faceless_at(index, spec.faceless_fraction);

      ManifestRecord rec;
      rec.sample_id = id;
      rec.driver_path = "driver/" + id + ".ppm";
      rec.distraction_label = static_cast<int>(cls);
      rec.provenance = Provenance::kGroundTruth;

      if (faceless) {
        ++faceless_count;
        rec.emotion_label = kNonFaceLabel;
        Image driver = synth_driver_image(spec, index, static_cast<int>(cls), nullptr);
        save_ppm(driver, out_dir / rec.driver_path);
        ann << id << ",none\n";
      } else {
        const int emotion = static_cast<int>(faced_seen % spec.num_emotions);
        ++faced_seen;
        rec.emotion_label = emotion;
        rec.face_path = "face/" + id + ".ppm";
        Image face = synth_face_image(spec, index, emotion);
        save_ppm(face, out_dir / rec.face_path);
        Image driver = synth_driver_image(spec, index, static_cast<int>(cls), &face);
        save_ppm(driver, out_dir / rec.driver_path);
        ann << id << ',' << box.x << ',' << box.y << ',' << box.w << ',' << box.h << "\n";
      }
      driver_map[id] = driver_name(index % spec.num_drivers);
      records.push_back(std::move(rec));
    }
  }
  if (!ann) throw DataError("short write to annotations.csv");
  ann.close();

  SyntheticResult result;
  result.samples = records.size();
  result.faceless = faceless_count;
  result.manifest = out_dir / "manifest.csv";
  result.annotations = out_dir / "annotations.csv";
  result.drivers = out_dir / "drivers.csv";
  write_manifest(result.manifest, records);
  write_driver_map(result.drivers, driver_map);
  return result;
}

}  // namespace vitdd
