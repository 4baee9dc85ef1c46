#include "vitdd/classes.hpp"

#include <string>

#include "vitdd/errors.hpp"

namespace vitdd {

std::string_view distraction_name(int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= kNumDistractionClasses) {
    throw LabelError("distraction label " + std::to_string(label) + " out of range [0, 10)");
  }
  return kDistractionNames[static_cast<std::size_t>(label)];
}

std::string_view emotion_name(int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= kNumEmotionClasses) {
    throw LabelError("emotion label " + std::to_string(label) + " out of range [0, 8)");
  }
  return kEmotionNames[static_cast<std::size_t>(label)];
}

}  // namespace vitdd
