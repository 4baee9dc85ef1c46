#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vitdd/model.hpp"

namespace vitdd {

/// Checkpoint layout (all integers little-endian uint64):
///   magic "VITDD1\0"
///   config record length, then "key=value\n" lines sorted by key
///   for each parameter in lexicographic name order:
///     name length, name bytes, rank, dims..., raw little-endian f64 data
/// Reloading and re-saving reproduces identical bytes.
struct RawCheckpoint {
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> params;  // sorted by name
};

void save_checkpoint(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& config,
                     const ParamRegistry& params);
RawCheckpoint load_checkpoint(const std::filesystem::path& path);

std::map<std::string, std::string> encode_model_config(const ModelConfig& config);
std::map<std::string, std::string> encode_teacher_config(const TeacherConfig& config);
ModelConfig decode_model_config(const std::map<std::string, std::string>& kv);
TeacherConfig decode_teacher_config(const std::map<std::string, std::string>& kv);

void save_student(const std::filesystem::path& path, const ModelConfig& config,
                  const ViTDDParams& params);
std::pair<ModelConfig, ViTDDParams> load_student(const std::filesystem::path& path);

void save_teacher(const std::filesystem::path& path, const TeacherConfig& config,
                  const TeacherParams& params);
std::pair<TeacherConfig, TeacherParams> load_teacher(const std::filesystem::path& path);

/// "%.17g" rendering: shortest fixed formatting that round-trips doubles.
std::string format_double(double v);

}  // namespace vitdd
