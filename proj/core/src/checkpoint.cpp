#include "vitdd/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "vitdd/errors.hpp"

namespace vitdd {

namespace {

constexpr char kMagic[7] = {'V', 'I', 'T', 'D', 'D', '1', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Reader {
  const std::string& bytes;
  const std::filesystem::path& path;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (bytes.size() - pos < n) {
      throw FormatError(path.string() + ": truncated checkpoint (" + what + " at byte " +
                        std::to_string(pos) + ")");
    }
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64(const char* what) {
    std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string chunk(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::size_t as_size(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("checkpoint config missing key '" + key + "'");
  return static_cast<std::size_t>(std::strtoull(it->second.c_str(), nullptr, 10));
}

double as_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("checkpoint config missing key '" + key + "'");
  return std::strtod(it->second.c_str(), nullptr);
}

std::string expect_kind(const std::map<std::string, std::string>& kv, const char* want) {
  auto it = kv.find("kind");
  if (it == kv.end()) throw FormatError("checkpoint config missing key 'kind'");
  if (it->second != want) {
    throw FormatError("checkpoint kind '" + it->second + "', expected '" + want + "'");
  }
  return it->second;
}

/// Copies loaded tensors into a shape-validated registry.
void fill_params(const ParamRegistry& target, const RawCheckpoint& ckpt,
                 const std::filesystem::path& path) {
  std::map<std::string, Tensor> by_name;
  for (const auto& [name, tensor] : ckpt.params) by_name.emplace(name, tensor);
  if (by_name.size() != target.size()) {
    throw FormatError(path.string() + ": has " + std::to_string(by_name.size()) +
                      " parameters, model expects " + std::to_string(target.size()));
  }
  for (const auto& [name, tensor] : target) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw FormatError(path.string() + ": missing parameter '" + name + "'");
    }
    if (it->second.shape() != tensor.shape()) {
      throw FormatError(path.string() + ": parameter '" + name + "' has shape " +
                        shape_str(it->second.shape()) + ", expected " +
                        shape_str(tensor.shape()));
    }
    Tensor dst = tensor;
    auto src = it->second.values();
    std::copy(src.begin(), src.end(), dst.values().begin());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::map<std::string, std::string>& config,
                     const ParamRegistry& params) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));

  std::string record;
  for (const auto& [k, v] : config) {
    record += k;
    record += '=';
    record += v;
    record += '\n';
  }
  put_u64(out, record.size());
  out += record;

  std::vector<std::pair<std::string, Tensor>> sorted(params.begin(), params.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, tensor] : sorted) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, tensor.rank());
    for (std::size_t d : tensor.shape()) put_u64(out, d);
    for (double v : tensor.values()) put_f64(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to " + path.string());
}

RawCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": bad checkpoint magic");
  }
  Reader r{bytes, path, sizeof(kMagic)};
  RawCheckpoint ckpt;

  const std::uint64_t record_len = r.u64("config record length");
  std::string record = r.chunk(record_len, "config record");
  std::size_t start = 0;
  while (start < record.size()) {
    std::size_t nl = record.find('\n', start);
    if (nl == std::string::npos) {
      throw FormatError(path.string() + ": config record not newline-terminated");
    }
    std::string line = record.substr(start, nl - start);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ": config line without '=': " + line);
    }
    ckpt.config.emplace(line.substr(0, eq), line.substr(eq + 1));
    start = nl + 1;
  }

  while (r.pos < bytes.size()) {
    const std::uint64_t name_len = r.u64("parameter name length");
    std::string name = r.chunk(name_len, "parameter name");
    const std::uint64_t rank = r.u64("parameter rank");
    Shape shape;
    std::size_t numel = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape.push_back(r.u64("parameter dim"));
      numel *= shape.back();
    }
    std::vector<double> data(numel);
    for (std::size_t i = 0; i < numel; ++i) data[i] = r.f64("parameter data");
    ckpt.params.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

std::map<std::string, std::string> encode_model_config(const ModelConfig& c) {
  return {
      {"kind", "student"},
      {"embed_dim", std::to_string(c.embed_dim)},
      {"depth", std::to_string(c.depth)},
      {"num_heads", std::to_string(c.num_heads)},
      {"patch_size", std::to_string(c.patch_size)},
      {"channels", std::to_string(c.channels)},
      {"driver_height", std::to_string(c.driver_height)},
      {"driver_width", std::to_string(c.driver_width)},
      {"face_height", std::to_string(c.face_height)},
      {"face_width", std::to_string(c.face_width)},
      {"mlp_ratio", format_double(c.mlp_ratio)},
      {"num_distraction_classes", std::to_string(c.num_distraction_classes)},
      {"num_emotion_classes", std::to_string(c.num_emotion_classes)},
      {"lambda_distraction", format_double(c.lambda_distraction)},
      {"lambda_emotion", format_double(c.lambda_emotion)},
      {"norm_eps", format_double(c.norm_eps)},
  };
}

std::map<std::string, std::string> encode_teacher_config(const TeacherConfig& c) {
  return {
      {"kind", "teacher"},
      {"embed_dim", std::to_string(c.embed_dim)},
      {"depth", std::to_string(c.depth)},
      {"num_heads", std::to_string(c.num_heads)},
      {"patch_size", std::to_string(c.patch_size)},
      {"channels", std::to_string(c.channels)},
      {"face_height", std::to_string(c.face_height)},
      {"face_width", std::to_string(c.face_width)},
      {"mlp_ratio", format_double(c.mlp_ratio)},
      {"num_classes", std::to_string(c.num_classes)},
      {"norm_eps", format_double(c.norm_eps)},
  };
}

ModelConfig decode_model_config(const std::map<std::string, std::string>& kv) {
  expect_kind(kv, "student");
  ModelConfig c;
  c.embed_dim = as_size(kv, "embed_dim");
  c.depth = as_size(kv, "depth");
  c.num_heads = as_size(kv, "num_heads");
  c.patch_size = as_size(kv, "patch_size");
  c.channels = as_size(kv, "channels");
  c.driver_height = as_size(kv, "driver_height");
  c.driver_width = as_size(kv, "driver_width");
  c.face_height = as_size(kv, "face_height");
  c.face_width = as_size(kv, "face_width");
  c.mlp_ratio = as_double(kv, "mlp_ratio");
  c.num_distraction_classes = as_size(kv, "num_distraction_classes");
  c.num_emotion_classes = as_size(kv, "num_emotion_classes");
  c.lambda_distraction = as_double(kv, "lambda_distraction");
  c.lambda_emotion = as_double(kv, "lambda_emotion");
  c.norm_eps = as_double(kv, "norm_eps");
  c.validate();
  return c;
}

TeacherConfig decode_teacher_config(const std::map<std::string, std::string>& kv) {
  expect_kind(kv, "teacher");
  TeacherConfig c;
  c.embed_dim = as_size(kv, "embed_dim");
  c.depth = as_size(kv, "depth");
  c.num_heads = as_size(kv, "num_heads");
  c.patch_size = as_size(kv, "patch_size");
  c.channels = as_size(kv, "channels");
  c.face_height = as_size(kv, "face_height");
  c.face_width = as_size(kv, "face_width");
  c.mlp_ratio = as_double(kv, "mlp_ratio");
  c.num_classes = as_size(kv, "num_classes");
  c.norm_eps = as_double(kv, "norm_eps");
  c.validate();
  return c;
}

void save_student(const std::filesystem::path& path, const ModelConfig& config,
                  const ViTDDParams& params) {
  save_checkpoint(path, encode_model_config(config), params.named());
}

std::pair<ModelConfig, ViTDDParams> load_student(const std::filesystem::path& path) {
  RawCheckpoint ckpt = load_checkpoint(path);
  ModelConfig config = decode_model_config(ckpt.config);
  ViTDDParams params = ViTDDParams::zeros(config);
  fill_params(params.named(), ckpt, path);
  return {config, std::move(params)};
}

void save_teacher(const std::filesystem::path& path, const TeacherConfig& config,
                  const TeacherParams& params) {
  save_checkpoint(path, encode_teacher_config(config), params.named());
}

std::pair<TeacherConfig, TeacherParams> load_teacher(const std::filesystem::path& path) {
  RawCheckpoint ckpt = load_checkpoint(path);
  TeacherConfig config = decode_teacher_config(ckpt.config);
  TeacherParams params = TeacherParams::zeros(config);
  fill_params(params.named(), ckpt, path);
  return {config, std::move(params)};
}

}  // namespace vitdd
