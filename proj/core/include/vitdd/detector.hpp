#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "vitdd/image.hpp"
#include "vitdd/tensor.hpp"

namespace vitdd {

struct FaceDetection {
  bool found = false;
  PixelBox box;  // source-image pixel coordinates when found
};

/// Pluggable face detection interface. Implementations must return boxes
/// fully inside the source image with positive extent.
class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual FaceDetection detect(const std::string& sample_id, const Image& driver) = 0;
};

/// Reads detections from a sidecar annotation file with one line per sample:
/// `sample_id,x,y,w,h` or `sample_id,none`. A sample without a line is a
/// contract breach.
class StubDetector : public FaceDetector {
 public:
  explicit StubDetector(const std::filesystem::path& annotations);
  FaceDetection detect(const std::string& sample_id, const Image& driver) override;

 private:
  std::map<std::string, std::optional<PixelBox>> boxes_;
  std::filesystem::path source_;
};

/// Fixed-rule detector: always reports a face in the frame's top-right
/// corner at the configured size (where the synthetic generator paints it).
class SyntheticDetector : public FaceDetector {
 public:
  SyntheticDetector(std::size_t face_width, std::size_t face_height)
      : face_width_(face_width), face_height_(face_height) {}
  FaceDetection detect(const std::string& sample_id, const Image& driver) override;

 private:
  std::size_t face_width_, face_height_;
};

/// Detector that never finds a face; exercises the Non-Face path.
class NeverDetector : public FaceDetector {
 public:
  FaceDetection detect(const std::string&, const Image&) override { return {}; }
};

struct DetectAndCropResult {
  FaceDetection detection;
  std::optional<Tensor> face;        // normalized [3 x face_h x face_w]
  std::optional<Image> face_image;   // quantized crop for saving to disk
};

/// Runs the detector and, when a face is found, crops the box and resizes it
/// to (face_width, face_height) with bilinear interpolation. The tensor is
/// produced from the unquantized resample; the image is its 8-bit rendering.
DetectAndCropResult detect_and_crop(const std::string& sample_id, const Image& driver,
                                    FaceDetector& detector, std::size_t face_width,
                                    std::size_t face_height);

}  // namespace vitdd
