#pragma once

#include <array>
#include <string_view>

namespace vitdd {

inline constexpr std::size_t kNumDistractionClasses = 10;
inline constexpr std::size_t kNumEmotionClasses = 8;  // 7 emotions + Non-Face
inline constexpr int kNonFaceLabel = 7;

/// Canonical driving-posture vocabulary, C0 through C9.
inline constexpr std::array<std::string_view, kNumDistractionClasses> kDistractionNames = {
    "C0 Safe Driving",   "C1 Phone Right",     "C2 Phone Left",
    "C3 Text Right",     "C4 Text Left",       "C5 Adjusting Radio",
    "C6 Drinking",       "C7 Hair or Makeup",  "C8 Reaching Behind",
    "C9 Talking to Passenger",
};

/// Emotion vocabulary; index 7 is reserved for Non-Face.
inline constexpr std::array<std::string_view, kNumEmotionClasses> kEmotionNames = {
    "happy", "sad", "surprise", "fear", "disgust", "anger", "neutral", "non-face",
};

std::string_view distraction_name(int label);
std::string_view emotion_name(int label);

}  // namespace vitdd
