#include "vitdd/detector.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "vitdd/errors.hpp"

namespace vitdd {

StubDetector::StubDetector(const std::filesystem::path& annotations) : source_(annotations) {
  std::ifstream in(annotations);
  if (!in) throw DataError("cannot open annotations " + annotations.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() == 2 && fields[1] == "none") {
      boxes_[fields[0]] = std::nullopt;
    } else if (fields.size() == 5) {
      try {
        PixelBox box;
        box.x = std::stoul(fields[1]);
        box.y = std::stoul(fields[2]);
        box.w = std::stoul(fields[3]);
        box.h = std::stoul(fields[4]);
        boxes_[fields[0]] = box;
      } catch (const std::exception&) {
        throw FormatError(annotations.string() + ": line " + std::to_string(line_no) +
                          ": bad box coordinates");
      }
    } else {
      throw FormatError(annotations.string() + ": line " + std::to_string(line_no) +
                        ": expected 'id,x,y,w,h' or 'id,none'");
    }
  }
}

FaceDetection StubDetector::detect(const std::string& sample_id, const Image&) {
  auto it = boxes_.find(sample_id);
  if (it == boxes_.end()) {
    throw DetectorError(source_.string() + ": no annotation for sample '" + sample_id + "'");
  }
  if (!it->second) return {};
  return FaceDetection{true, *it->second};
}

FaceDetection SyntheticDetector::detect(const std::string&, const Image& driver) {
  if (driver.width < face_width_ || driver.height < face_height_) {
    throw DetectorError("synthetic detector: frame smaller than the fixed face box");
  }
  return FaceDetection{true, PixelBox{driver.width - face_width_, 0, face_width_, face_height_}};
}

DetectAndCropResult detect_and_crop(const std::string& sample_id, const Image& driver,
                                    FaceDetector& detector, std::size_t face_width,
                                    std::size_t face_height) {
  DetectAndCropResult result;
  result.detection = detector.detect(sample_id, driver);
  if (!result.detection.found) return result;

  const PixelBox& box = result.detection.box;
  if (box.w == 0 || box.h == 0 || box.x + box.w > driver.width ||
      box.y + box.h > driver.height) {
    throw DetectorError("sample '" + sample_id + "': box (" + std::to_string(box.x) + ", " +
                        std::to_string(box.y) + ", " + std::to_string(box.w) + ", " +
                        std::to_string(box.h) + ") outside " + std::to_string(driver.width) +
                        "x" + std::to_string(driver.height) + " frame");
  }
  Image region = crop(driver, box);
  std::vector<double> resampled = bilinear_resize_values(region, face_width, face_height);

  // Tensor from the unquantized resample, normalized like image_to_tensor.
  Tensor face(Shape{3, face_height, face_width});
  auto fv = face.values();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < face_height; ++y)
      for (std::size_t x = 0; x < face_width; ++x)
        fv[(c * face_height + y) * face_width + x] =
            (resampled[(y * face_width + x) * 3 + c] / 255.0 - 0.5) / 0.5;
  result.face = std::move(face);

  Image quantized(face_width, face_height);
  for (std::size_t i = 0; i < resampled.size(); ++i) {
    quantized.pixels[i] =
        static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, resampled[i]))));
  }
  result.face_image = std::move(quantized);
  return result;
}

}  // namespace vitdd
