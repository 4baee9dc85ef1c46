#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vitdd {

enum class Provenance { kGroundTruth, kPseudo };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view s);

/// One dataset sample. Paths are stored relative to the manifest's directory;
/// an empty face_path means NONE (no face detected / generated).
struct ManifestRecord {
  std::string sample_id;
  std::string driver_path;
  std::string face_path;  // empty = NONE
  int distraction_label = 0;
  int emotion_label = 0;  // 7 = Non-Face
  Provenance provenance = Provenance::kGroundTruth;
  std::optional<double> confidence;

  /// Range and consistency invariants: labels in range, emotion 7 iff no
  /// face, confidence present iff pseudo-labeled with a face.
  void validate() const;
};

/// CSV with header `sample_id,driver_path,face_path,distraction,emotion,
/// provenance,confidence`, LF line endings, NONE encoded as the empty field.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Validates and writes records sorted by sample_id (byte-deterministic).
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records);

/// `drivers.csv`: header `sample_id,driver_id`.
std::map<std::string, std::string> read_driver_map(const std::filesystem::path& path);
void write_driver_map(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& m);

}  // namespace vitdd
