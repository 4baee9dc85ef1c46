#include "vitdd/model.hpp"

#include <cmath>
#include <string>

#include "vitdd/errors.hpp"
#include "vitdd/rng.hpp"

namespace vitdd {

namespace {

void check_divisible(const char* what, std::size_t value, std::size_t divisor) {
  if (divisor == 0 || value % divisor != 0) {
    throw ConfigError(std::string(what) + " (" + std::to_string(value) +
                      ") must be divisible by " + std::to_string(divisor));
  }
}

// rng == nullptr leaves the tensor zeroed (checkpoint loading path).
Tensor trunc_normal(Shape shape, Rng* rng, double sigma = 0.02) {
  Tensor t(std::move(shape));
  if (rng) {
    for (double& v : t.values()) v = rng->truncated_normal(sigma, 2.0 * sigma);
  }
  return t;
}

BlockParams init_block(std::size_t d, std::size_t hidden, Rng* rng) {
  BlockParams b;
  b.ln1_gamma = Tensor(Shape{d}, 1.0);
  b.ln1_beta = Tensor(Shape{d}, 0.0);
  b.msa.qkv_weight = trunc_normal(Shape{d, 3 * d}, rng);
  b.msa.qkv_bias = Tensor(Shape{3 * d}, 0.0);
  b.msa.proj_weight = trunc_normal(Shape{d, d}, rng);
  b.msa.proj_bias = Tensor(Shape{d}, 0.0);
  b.ln2_gamma = Tensor(Shape{d}, 1.0);
  b.ln2_beta = Tensor(Shape{d}, 0.0);
  b.fc1_weight = trunc_normal(Shape{d, hidden}, rng);
  b.fc1_bias = Tensor(Shape{hidden}, 0.0);
  b.fc2_weight = trunc_normal(Shape{hidden, d}, rng);
  b.fc2_bias = Tensor(Shape{d}, 0.0);
  return b;
}

void register_block(ParamRegistry& reg, const BlockParams& b, std::size_t index) {
  const std::string p = "blocks." + std::to_string(index) + ".";
  reg.emplace_back(p + "ln1.gamma", b.ln1_gamma);
  reg.emplace_back(p + "ln1.beta", b.ln1_beta);
  reg.emplace_back(p + "msa.qkv.weight", b.msa.qkv_weight);
  reg.emplace_back(p + "msa.qkv.bias", b.msa.qkv_bias);
  reg.emplace_back(p + "msa.proj.weight", b.msa.proj_weight);
  reg.emplace_back(p + "msa.proj.bias", b.msa.proj_bias);
  reg.emplace_back(p + "ln2.gamma", b.ln2_gamma);
  reg.emplace_back(p + "ln2.beta", b.ln2_beta);
  reg.emplace_back(p + "mlp.fc1.weight", b.fc1_weight);
  reg.emplace_back(p + "mlp.fc1.bias", b.fc1_bias);
  reg.emplace_back(p + "mlp.fc2.weight", b.fc2_weight);
  reg.emplace_back(p + "mlp.fc2.bias", b.fc2_bias);
}

/// Shared encoder stack + final norm; returns the normalized sequence.
Tensor run_encoder(Tape& tape, Tensor z, const std::vector<BlockParams>& blocks,
                   std::size_t num_heads, double eps, const Tensor& norm_gamma,
                   const Tensor& norm_beta, AttentionCapture* capture) {
  for (const BlockParams& block : blocks) {
    Tensor attn;
    Tensor* slot = capture ? &attn : nullptr;
    Tensor h = tape.layer_norm(z, block.ln1_gamma, block.ln1_beta, eps);
    Tensor attn_out = msa(tape, h, block.msa, num_heads, slot);
    z = tape.add(z, attn_out);
    Tensor h2 = tape.layer_norm(z, block.ln2_gamma, block.ln2_beta, eps);
    Tensor m = tape.linear(h2, block.fc1_weight, block.fc1_bias);
    m = tape.gelu(m);
    m = tape.linear(m, block.fc2_weight, block.fc2_bias);
    z = tape.add(z, m);
    if (capture) capture->layers.push_back(attn);
  }
  return tape.layer_norm(z, norm_gamma, norm_beta, eps);
}

Tensor patchify_impl(const Tensor& image, std::size_t channels, std::size_t height,
                     std::size_t width, std::size_t patch) {
  if (image.rank() != 3 || image.dim(0) != channels || image.dim(1) != height ||
      image.dim(2) != width) {
    throw DimensionError("patchify: image " + shape_str(image.shape()) +
                         " does not match expected [" + std::to_string(channels) + "x" +
                         std::to_string(height) + "x" + std::to_string(width) + "]");
  }
  check_divisible("image height", height, patch);
  check_divisible("image width", width, patch);
  const std::size_t rows = height / patch, cols = width / patch;
  const std::size_t n = rows * cols, pd = patch * patch * channels;
  Tensor out(Shape{n, pd});
  auto iv = image.values();
  auto ov = out.values();
  for (std::size_t pr = 0; pr < rows; ++pr)
    for (std::size_t pc = 0; pc < cols; ++pc) {
      const std::size_t row = pr * cols + pc;
      std::size_t k = 0;
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t y = 0; y < patch; ++y)
          for (std::size_t x = 0; x < patch; ++x)
            ov[row * pd + k++] = iv[(c * height + pr * patch + y) * width + pc * patch + x];
    }
  return out;
}

}  // namespace

ModelConfig ModelConfig::paper() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.embed_dim = 32;
  c.depth = 2;
  c.num_heads = 2;
  c.patch_size = 4;
  c.driver_height = c.driver_width = 16;
  c.face_height = c.face_width = 8;
  return c;
}

void ModelConfig::validate() const {
  if (embed_dim == 0 || depth == 0 || num_heads == 0 || patch_size == 0 || channels == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  check_divisible("embed_dim", embed_dim, num_heads);
  check_divisible("driver height", driver_height, patch_size);
  check_divisible("driver width", driver_width, patch_size);
  check_divisible("face height", face_height, patch_size);
  check_divisible("face width", face_width, patch_size);
  if (mlp_ratio <= 0.0) throw ConfigError("mlp_ratio must be positive");
  if (lambda_distraction < 0.0 || lambda_emotion < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (norm_eps <= 0.0) throw ConfigError("norm_eps must be positive");
  if (num_distraction_classes == 0 || num_emotion_classes == 0) {
    throw ConfigError("class counts must be positive");
  }
}

TeacherConfig TeacherConfig::from(const ModelConfig& student) {
  TeacherConfig t;
  t.embed_dim = student.embed_dim;
  t.depth = student.depth;
  t.num_heads = student.num_heads;
  t.patch_size = student.patch_size;
  t.channels = student.channels;
  t.face_height = student.face_height;
  t.face_width = student.face_width;
  t.mlp_ratio = student.mlp_ratio;
  t.num_classes = student.num_emotion_classes - 1;  // no Non-Face class for the teacher
  t.norm_eps = student.norm_eps;
  return t;
}

void TeacherConfig::validate() const {
  if (embed_dim == 0 || depth == 0 || num_heads == 0 || patch_size == 0 || channels == 0) {
    throw ConfigError("teacher dimensions must be positive");
  }
  check_divisible("embed_dim", embed_dim, num_heads);
  check_divisible("face height", face_height, patch_size);
  check_divisible("face width", face_width, patch_size);
  if (num_classes == 0) throw ConfigError("teacher class count must be positive");
  if (norm_eps <= 0.0) throw ConfigError("norm_eps must be positive");
}

namespace {

ViTDDParams build_vitdd_params(const ModelConfig& config, Rng* rng) {
  config.validate();
  const std::size_t d = config.embed_dim;
  ViTDDParams p;
  p.embed_driver.proj_weight = trunc_normal(Shape{config.patch_dim(), d}, rng);
  p.embed_driver.proj_bias = Tensor(Shape{d}, 0.0);
  p.embed_driver.pos = trunc_normal(Shape{config.num_patches(Modality::kDriver), d}, rng);
  p.embed_face.proj_weight = trunc_normal(Shape{config.patch_dim(), d}, rng);
  p.embed_face.proj_bias = Tensor(Shape{d}, 0.0);
  p.embed_face.pos = trunc_normal(Shape{config.num_patches(Modality::kFace), d}, rng);
  p.token_dist = trunc_normal(Shape{d}, rng);
  p.token_emo = trunc_normal(Shape{d}, rng);
  for (std::size_t i = 0; i < config.depth; ++i) {
    p.blocks.push_back(init_block(d, config.mlp_hidden(), rng));
  }
  p.norm_gamma = Tensor(Shape{d}, 1.0);
  p.norm_beta = Tensor(Shape{d}, 0.0);
  p.head_dist_weight = trunc_normal(Shape{d, config.num_distraction_classes}, rng);
  p.head_dist_bias = Tensor(Shape{config.num_distraction_classes}, 0.0);
  p.head_emo_weight = trunc_normal(Shape{d, config.num_emotion_classes}, rng);
  p.head_emo_bias = Tensor(Shape{config.num_emotion_classes}, 0.0);
  return p;
}

TeacherParams build_teacher_params(const TeacherConfig& config, Rng* rng) {
  config.validate();
  const std::size_t d = config.embed_dim;
  TeacherParams p;
  p.embed.proj_weight = trunc_normal(Shape{config.patch_dim(), d}, rng);
  p.embed.proj_bias = Tensor(Shape{d}, 0.0);
  p.embed.pos = trunc_normal(Shape{config.num_patches(), d}, rng);
  p.token = trunc_normal(Shape{d}, rng);
  for (std::size_t i = 0; i < config.depth; ++i) {
    p.blocks.push_back(init_block(d, config.mlp_hidden(), rng));
  }
  p.norm_gamma = Tensor(Shape{d}, 1.0);
  p.norm_beta = Tensor(Shape{d}, 0.0);
  p.head_weight = trunc_normal(Shape{d, config.num_classes}, rng);
  p.head_bias = Tensor(Shape{config.num_classes}, 0.0);
  return p;
}

}  // namespace

ViTDDParams ViTDDParams::init(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "vitdd-init");
  return build_vitdd_params(config, &rng);
}

ViTDDParams ViTDDParams::zeros(const ModelConfig& config) {
  return build_vitdd_params(config, nullptr);
}

ParamRegistry ViTDDParams::named() const {
  ParamRegistry reg;
  reg.emplace_back("embed.driver.proj.weight", embed_driver.proj_weight);
  reg.emplace_back("embed.driver.proj.bias", embed_driver.proj_bias);
  reg.emplace_back("embed.driver.pos", embed_driver.pos);
  reg.emplace_back("embed.face.proj.weight", embed_face.proj_weight);
  reg.emplace_back("embed.face.proj.bias", embed_face.proj_bias);
  reg.emplace_back("embed.face.pos", embed_face.pos);
  reg.emplace_back("class_tokens.dist", token_dist);
  reg.emplace_back("class_tokens.emo", token_emo);
  for (std::size_t i = 0; i < blocks.size(); ++i) register_block(reg, blocks[i], i);
  reg.emplace_back("final_norm.gamma", norm_gamma);
  reg.emplace_back("final_norm.beta", norm_beta);
  reg.emplace_back("heads.dist.weight", head_dist_weight);
  reg.emplace_back("heads.dist.bias", head_dist_bias);
  reg.emplace_back("heads.emo.weight", head_emo_weight);
  reg.emplace_back("heads.emo.bias", head_emo_bias);
  return reg;
}

TeacherParams TeacherParams::init(const TeacherConfig& config, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "teacher-init");
  return build_teacher_params(config, &rng);
}

TeacherParams TeacherParams::zeros(const TeacherConfig& config) {
  return build_teacher_params(config, nullptr);
}

ParamRegistry TeacherParams::named() const {
  ParamRegistry reg;
  reg.emplace_back("embed.face.proj.weight", embed.proj_weight);
  reg.emplace_back("embed.face.proj.bias", embed.proj_bias);
  reg.emplace_back("embed.face.pos", embed.pos);
  reg.emplace_back("class_tokens.cls", token);
  for (std::size_t i = 0; i < blocks.size(); ++i) register_block(reg, blocks[i], i);
  reg.emplace_back("final_norm.gamma", norm_gamma);
  reg.emplace_back("final_norm.beta", norm_beta);
  reg.emplace_back("heads.cls.weight", head_weight);
  reg.emplace_back("heads.cls.bias", head_bias);
  return reg;
}

Tensor patchify(const Tensor& image, const ModelConfig& config, Modality modality) {
  return patchify_impl(image, config.channels, config.height(modality), config.width(modality),
                       config.patch_size);
}

Tensor embed(Tape& tape, const Tensor& image, const ModalityEmbedParams& params,
             const ModelConfig& config, Modality modality) {
  Tensor patches = patchify(image, config, modality);
  Tensor projected = tape.linear(patches, params.proj_weight, params.proj_bias);
  return tape.add(projected, params.pos);
}

Tensor assemble_sequence(Tape& tape, const Tensor& driver_emb, const Tensor& face_emb,
                         const ViTDDParams& params) {
  const std::size_t d = params.token_dist.dim(0);
  if (driver_emb.rank() != 2 || face_emb.rank() != 2 || driver_emb.dim(1) != d ||
      face_emb.dim(1) != d) {
    throw DimensionError("assemble_sequence: embedding widths " + shape_str(driver_emb.shape()) +
                         ", " + shape_str(face_emb.shape()) + " do not match token width " +
                         std::to_string(d));
  }
  Tensor t0 = tape.reshape(params.token_dist, Shape{1, d});
  Tensor t1 = tape.reshape(params.token_emo, Shape{1, d});
  const Tensor parts[] = {t0, t1, driver_emb, face_emb};
  return tape.concat(parts, 0);
}

Tensor msa(Tape& tape, const Tensor& z, const AttentionParams& params, std::size_t num_heads,
           Tensor* capture) {
  if (z.rank() != 2) {
    throw DimensionError("msa: expected [T x D] sequence, got " + shape_str(z.shape()));
  }
  const std::size_t t = z.dim(0), d = z.dim(1);
  if (num_heads == 0 || d % num_heads != 0) {
    throw ConfigError("msa: embed width " + std::to_string(d) + " not divisible into " +
                      std::to_string(num_heads) + " heads");
  }
  if (params.qkv_weight.dim(0) != d || params.qkv_weight.dim(1) != 3 * d) {
    throw DimensionError("msa: qkv weight " + shape_str(params.qkv_weight.shape()) +
                         " does not match sequence width " + std::to_string(d));
  }
  const std::size_t dh = d / num_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor qkv = tape.linear(z, params.qkv_weight, params.qkv_bias);  // T x 3D
  std::vector<Tensor> head_outputs;
  head_outputs.reserve(num_heads);
  Tensor attn_stack;
  if (capture) attn_stack = Tensor(Shape{num_heads, t, t});
  for (std::size_t h = 0; h < num_heads; ++h) {
    Tensor q = tape.slice(qkv, 1, h * dh, (h + 1) * dh);
    Tensor k = tape.slice(qkv, 1, d + h * dh, d + (h + 1) * dh);
    Tensor v = tape.slice(qkv, 1, 2 * d + h * dh, 2 * d + (h + 1) * dh);
    Tensor scores = tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_dh);
    Tensor attn = tape.softmax(scores, 1);
    if (capture) {
      auto src = attn.values();
      auto dst = attn_stack.values();
      std::copy(src.begin(), src.end(), dst.begin() + h * t * t);
    }
    head_outputs.push_back(tape.attention_values(attn, v));
  }
  Tensor cat = num_heads == 1 ? head_outputs[0] : tape.concat(head_outputs, 1);
  if (capture) *capture = attn_stack;
  return tape.linear(cat, params.proj_weight, params.proj_bias);
}

Tensor encoder_block(Tape& tape, const Tensor& z, const BlockParams& params,
                     const ModelConfig& config, Tensor* capture) {
  Tensor h = tape.layer_norm(z, params.ln1_gamma, params.ln1_beta, config.norm_eps);
  Tensor attn_out = msa(tape, h, params.msa, config.num_heads, capture);
  Tensor z1 = tape.add(z, attn_out);
  Tensor h2 = tape.layer_norm(z1, params.ln2_gamma, params.ln2_beta, config.norm_eps);
  Tensor m = tape.linear(h2, params.fc1_weight, params.fc1_bias);
  m = tape.gelu(m);
  m = tape.linear(m, params.fc2_weight, params.fc2_bias);
  return tape.add(z1, m);
}

ForwardOutput forward(Tape& tape, const Tensor& driver_image, const Tensor& face_image,
                      const ViTDDParams& params, const ModelConfig& config,
                      AttentionCapture* capture) {
  Tensor driver_emb = embed(tape, driver_image, params.embed_driver, config, Modality::kDriver);
  Tensor face_emb = embed(tape, face_image, params.embed_face, config, Modality::kFace);
  Tensor z = assemble_sequence(tape, driver_emb, face_emb, params);
  Tensor normed = run_encoder(tape, z, params.blocks, config.num_heads, config.norm_eps,
                              params.norm_gamma, params.norm_beta, capture);
  Tensor dist_row = tape.slice(normed, 0, 0, 1);
  Tensor emo_row = tape.slice(normed, 0, 1, 2);
  Tensor dist_logits = tape.linear(dist_row, params.head_dist_weight, params.head_dist_bias);
  Tensor emo_logits = tape.linear(emo_row, params.head_emo_weight, params.head_emo_bias);
  ForwardOutput out;
  out.dist_logits = tape.reshape(dist_logits, Shape{config.num_distraction_classes});
  out.emo_logits = tape.reshape(emo_logits, Shape{config.num_emotion_classes});
  return out;
}

Tensor multitask_loss(Tape& tape, const Tensor& dist_logits, const Tensor& emo_logits,
                      std::span<const int> dist_targets, std::span<const int> emo_targets,
                      double lambda_dist, double lambda_emo) {
  if (lambda_dist < 0.0 || lambda_emo < 0.0) {
    throw ConfigError("multitask_loss: loss weights must be nonnegative");
  }
  Tensor dist_ce = tape.cross_entropy(dist_logits, dist_targets);
  Tensor emo_ce = tape.cross_entropy(emo_logits, emo_targets);
  return tape.add(tape.scale(dist_ce, lambda_dist), tape.scale(emo_ce, lambda_emo));
}

Tensor teacher_forward(Tape& tape, const Tensor& face_image, const TeacherParams& params,
                       const TeacherConfig& config, AttentionCapture* capture) {
  Tensor patches = patchify_impl(face_image, config.channels, config.face_height,
                                 config.face_width, config.patch_size);
  Tensor projected = tape.linear(patches, params.embed.proj_weight, params.embed.proj_bias);
  Tensor emb = tape.add(projected, params.embed.pos);
  const std::size_t d = config.embed_dim;
  Tensor cls = tape.reshape(params.token, Shape{1, d});
  const Tensor parts[] = {cls, emb};
  Tensor z = tape.concat(parts, 0);
  Tensor normed = run_encoder(tape, z, params.blocks, config.num_heads, config.norm_eps,
                              params.norm_gamma, params.norm_beta, capture);
  Tensor cls_row = tape.slice(normed, 0, 0, 1);
  Tensor logits = tape.linear(cls_row, params.head_weight, params.head_bias);
  return tape.reshape(logits, Shape{config.num_classes});
}

}  // namespace vitdd
