#include "vitdd/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vitdd/classes.hpp"
#include "vitdd/checkpoint.hpp"
#include "vitdd/errors.hpp"

namespace vitdd {

namespace {

constexpr std::string_view kHeader =
    "sample_id,driver_path,face_path,distraction,emotion,provenance,confidence";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void check_field(const std::string& value, const char* what) {
  if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos ||
      value.find('\r') != std::string::npos) {
    throw FormatError(std::string(what) + " must not contain commas or line breaks: '" + value +
                      "'");
  }
}

int parse_int(const std::string& s, const char* what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

}  // namespace

std::string_view provenance_name(Provenance p) {
  return p == Provenance::kGroundTruth ? "GROUND_TRUTH" : "PSEUDO";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "GROUND_TRUTH") return Provenance::kGroundTruth;
  if (s == "PSEUDO") return Provenance::kPseudo;
  throw FormatError("unknown provenance '" + std::string(s) + "'");
}

void ManifestRecord::validate() const {
  if (sample_id.empty()) throw DataError("manifest record with empty sample_id");
  if (distraction_label < 0 ||
      static_cast<std::size_t>(distraction_label) >= kNumDistractionClasses) {
    throw LabelError(sample_id + ": distraction label " + std::to_string(distraction_label) +
                     " out of range [0, 10)");
  }
  if (emotion_label < 0 || static_cast<std::size_t>(emotion_label) >= kNumEmotionClasses) {
    throw LabelError(sample_id + ": emotion label " + std::to_string(emotion_label) +
                     " out of range [0, 8)");
  }
  const bool has_face = !face_path.empty();
  if ((emotion_label == kNonFaceLabel) == has_face) {
    throw DataError(sample_id + ": emotion label must be 7 (Non-Face) exactly when face path is NONE");
  }
  const bool expect_conf = provenance == Provenance::kPseudo && has_face;
  if (confidence.has_value() != expect_conf) {
    throw DataError(sample_id + std::string(": confidence must be present iff pseudo-labeled with a face"));
  }
  if (confidence && (*confidence < 0.0 || *confidence > 1.0)) {
    throw DataError(sample_id + ": confidence outside [0, 1]");
  }
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw FormatError(path.string() + ": bad header '" + line + "'");
  }
  std::vector<ManifestRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields, expected 7");
    }
    ManifestRecord r;
    r.sample_id = f[0];
    r.driver_path = f[1];
    r.face_path = f[2];
    r.distraction_label = parse_int(f[3], "distraction label", line_no);
    r.emotion_label = parse_int(f[4], "emotion label", line_no);
    r.provenance = parse_provenance(f[5]);
    if (!f[6].empty()) r.confidence = std::strtod(f[6].c_str(), nullptr);
    r.validate();
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records) {
  std::vector<ManifestRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ManifestRecord& a, const ManifestRecord& b) { return a.sample_id < b.sample_id; });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << kHeader << "\n";
  for (const ManifestRecord& r : sorted) {
    r.validate();
    check_field(r.sample_id, "sample_id");
    check_field(r.driver_path, "driver_path");
    check_field(r.face_path, "face_path");
    out << r.sample_id << ',' << r.driver_path << ',' << r.face_path << ','
        << r.distraction_label << ',' << r.emotion_label << ',' << provenance_name(r.provenance)
        << ',' << (r.confidence ? format_double(*r.confidence) : std::string()) << "\n";
  }
  if (!out) throw DataError("short write to " + path.string());
}

std::map<std::string, std::string> read_driver_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open driver map " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty driver map");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,driver_id") {
    throw FormatError(path.string() + ": bad header '" + line + "'");
  }
  std::map<std::string, std::string> m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " malformed");
    }
    if (!m.emplace(f[0], f[1]).second) {
      throw FormatError(path.string() + ": duplicate sample_id '" + f[0] + "'");
    }
  }
  return m;
}

void write_driver_map(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write driver map " + path.string());
  out << "sample_id,driver_id\n";
  for (const auto& [sample, driver] : m) out << sample << ',' << driver << "\n";
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace vitdd
