#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vitdd/tape.hpp"
#include "vitdd/tensor.hpp"

namespace vitdd {

/// Input modality index: the full driver frame or the cropped face.
enum class Modality : int { kDriver = 0, kFace = 1 };

/// Architecture hyperparameters for the dual-modality model. The paper
/// profile is the ViT-B-sized configuration; the desk profile is small enough
/// to train and finite-difference on a laptop.
struct ModelConfig {
  std::size_t embed_dim = 768;   // D
  std::size_t depth = 12;        // L
  std::size_t num_heads = 12;    // H
  std::size_t patch_size = 16;   // P
  std::size_t channels = 3;      // C
  std::size_t driver_height = 224, driver_width = 224;
  std::size_t face_height = 32, face_width = 32;
  double mlp_ratio = 4.0;
  std::size_t num_distraction_classes = 10;
  std::size_t num_emotion_classes = 8;  // 7 emotions + Non-Face
  double lambda_distraction = 1.0;
  double lambda_emotion = 1.0;
  double norm_eps = 1e-6;

  static ModelConfig paper();
  static ModelConfig desk();

  /// Checks divisibility invariants; throws ConfigError.
  void validate() const;

  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t patch_dim() const { return patch_size * patch_size * channels; }
  std::size_t mlp_hidden() const {
    return static_cast<std::size_t>(mlp_ratio * static_cast<double>(embed_dim) + 0.5);
  }
  std::size_t height(Modality m) const {
    return m == Modality::kDriver ? driver_height : face_height;
  }
  std::size_t width(Modality m) const {
    return m == Modality::kDriver ? driver_width : face_width;
  }
  /// N_i = H_i * W_i / P^2
  std::size_t num_patches(Modality m) const {
    return (height(m) / patch_size) * (width(m) / patch_size);
  }
  /// T = 2 + N_0 + N_1
  std::size_t seq_len() const {
    return 2 + num_patches(Modality::kDriver) + num_patches(Modality::kFace);
  }
};

/// Single-modality configuration for the emotion-recognition teacher:
/// face input only, one class token, 7-way head.
struct TeacherConfig {
  std::size_t embed_dim = 32;
  std::size_t depth = 2;
  std::size_t num_heads = 2;
  std::size_t patch_size = 4;
  std::size_t channels = 3;
  std::size_t face_height = 8, face_width = 8;
  double mlp_ratio = 4.0;
  std::size_t num_classes = 7;
  double norm_eps = 1e-6;

  /// Teacher that shares backbone dimensions and face geometry with a
  /// student configuration.
  static TeacherConfig from(const ModelConfig& student);

  void validate() const;
  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t patch_dim() const { return patch_size * patch_size * channels; }
  std::size_t mlp_hidden() const {
    return static_cast<std::size_t>(mlp_ratio * static_cast<double>(embed_dim) + 0.5);
  }
  std::size_t num_patches() const {
    return (face_height / patch_size) * (face_width / patch_size);
  }
  std::size_t seq_len() const { return 1 + num_patches(); }
};

/// One named, addressable parameter. The Tensor handle aliases the model's
/// storage, so mutating through the registry updates the model.
using NamedParam = std::pair<std::string, Tensor>;
using ParamRegistry = std::vector<NamedParam>;

struct AttentionParams {
  Tensor qkv_weight;   // D x 3D (fused query/key/value projection)
  Tensor qkv_bias;     // 3D
  Tensor proj_weight;  // D x D
  Tensor proj_bias;    // D
};

struct BlockParams {
  Tensor ln1_gamma, ln1_beta;
  AttentionParams msa;
  Tensor ln2_gamma, ln2_beta;
  Tensor fc1_weight, fc1_bias;  // D x hidden
  Tensor fc2_weight, fc2_bias;  // hidden x D
};

struct ModalityEmbedParams {
  Tensor proj_weight;  // (P^2 C) x D
  Tensor proj_bias;    // D
  Tensor pos;          // N_i x D
};

/// Complete learnable parameter set of the dual-modality model.
struct ViTDDParams {
  ModalityEmbedParams embed_driver, embed_face;
  Tensor token_dist, token_emo;  // D
  std::vector<BlockParams> blocks;
  Tensor norm_gamma, norm_beta;
  Tensor head_dist_weight, head_dist_bias;  // D x 10
  Tensor head_emo_weight, head_emo_bias;    // D x 8

  static ViTDDParams init(const ModelConfig& config, std::uint64_t seed);
  /// All-zero parameters with the right shapes (checkpoint loading).
  static ViTDDParams zeros(const ModelConfig& config);

  /// Stable-name registry, e.g. "blocks.3.msa.qkv.weight". Registry order is
  /// structural; sort by name where a canonical order is needed.
  ParamRegistry named() const;
};

/// Parameters of the single-modality teacher.
struct TeacherParams {
  ModalityEmbedParams embed;
  Tensor token;
  std::vector<BlockParams> blocks;
  Tensor norm_gamma, norm_beta;
  Tensor head_weight, head_bias;

  static TeacherParams init(const TeacherConfig& config, std::uint64_t seed);
  static TeacherParams zeros(const TeacherConfig& config);
  ParamRegistry named() const;
};

/// Per-layer attention matrices (H x T x T), detached from the tape.
struct AttentionCapture {
  std::vector<Tensor> layers;
};

struct ForwardOutput {
  Tensor dist_logits;  // [num_distraction_classes]
  Tensor emo_logits;   // [num_emotion_classes]
};

/// Splits an image into non-overlapping P x P patches, each flattened
/// row-major (channel-major within the patch), patches ordered left-to-right
/// then top-to-bottom. Output is N x (P^2 C). The image does not carry
/// gradients, so this runs off-tape.
Tensor patchify(const Tensor& image, const ModelConfig& config, Modality modality);

/// Patch projection plus position embedding for one modality (x * E + b + E_pos).
Tensor embed(Tape& tape, const Tensor& image, const ModalityEmbedParams& params,
             const ModelConfig& config, Modality modality);

/// [token_dist; token_emo; driver tokens; face tokens]. Row 0 and row 1 are
/// the class tokens; this index map is a frozen contract used by the
/// attention views.
Tensor assemble_sequence(Tape& tape, const Tensor& driver_emb, const Tensor& face_emb,
                         const ViTDDParams& params);

/// Multi-head self-attention over a T x D sequence. When `capture` is given
/// it receives the H x T x T attention matrix of this call.
Tensor msa(Tape& tape, const Tensor& z, const AttentionParams& params, std::size_t num_heads,
           Tensor* capture = nullptr);

/// Pre-norm encoder block: z' = MSA(LN(z)) + z; out = MLP(LN(z')) + z'.
Tensor encoder_block(Tape& tape, const Tensor& z, const BlockParams& params,
                     const ModelConfig& config, Tensor* capture = nullptr);

/// Full forward pass: embed both modalities, run L blocks, layer-norm the
/// class tokens and apply both heads. `capture`, when non-null, receives the
/// per-layer attention matrices.
ForwardOutput forward(Tape& tape, const Tensor& driver_image, const Tensor& face_image,
                      const ViTDDParams& params, const ModelConfig& config,
                      AttentionCapture* capture = nullptr);

/// lambda_dist * CE(dist) + lambda_emo * CE(emo). Logits may be single rows
/// or [batch x classes].
Tensor multitask_loss(Tape& tape, const Tensor& dist_logits, const Tensor& emo_logits,
                      std::span<const int> dist_targets, std::span<const int> emo_targets,
                      double lambda_dist, double lambda_emo);

/// Teacher forward: face modality only, one class token, one head.
Tensor teacher_forward(Tape& tape, const Tensor& face_image, const TeacherParams& params,
                       const TeacherConfig& config, AttentionCapture* capture = nullptr);

}  // namespace vitdd
