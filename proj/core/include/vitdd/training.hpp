#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vitdd/model.hpp"

namespace vitdd {

enum class FreezePolicy { kAllTrainable, kMsaOnly };

std::string_view freeze_policy_name(FreezePolicy p);
FreezePolicy parse_freeze_policy(std::string_view s);

/// Optimization recipe: AdamW with decoupled weight decay, linear warmup from
/// warmup_start_lr to base_lr, then cosine decay to final_lr, per-step
/// granularity.
struct TrainConfig {
  double base_lr = 3e-4;  // SFDDD profile; the AUCDD profile uses 6e-4
  double warmup_start_lr = 1e-6;
  double final_lr = 0.0;
  std::size_t warmup_epochs = 5;
  std::size_t total_epochs = 20;
  std::size_t batch_size = 16;
  double weight_decay = 0.1;
  double beta1 = 0.9, beta2 = 0.999;
  double adam_eps = 1e-8;
  FreezePolicy freeze = FreezePolicy::kAllTrainable;
  std::uint64_t seed = 0;
  bool augment = true;
  std::size_t augment_pad = 4;
  bool augment_flip = true;
  bool three_augment = false;  // accepted for config compatibility; warns and does nothing

  void validate() const;
};

/// Learning rate for a 0-based step index. Steps run in [0, total); lr_at of
/// the warmup boundary equals base_lr exactly and lr_at(total) is exactly
/// final_lr. Steps beyond the schedule return 0.
double lr_at(std::size_t step, std::size_t steps_per_epoch, const TrainConfig& config);

/// Selects the trainable subset of a registry. kMsaOnly keeps exactly
/// {blocks.*.msa.*, heads.*, class_tokens.*}: attention weights are
/// fine-tuned while heads and class tokens must train from scratch.
std::vector<std::string> apply_freeze_policy(const ParamRegistry& registry, FreezePolicy policy);

/// AdamW with decoupled weight decay:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * mhat / (sqrt(vhat) + eps) - lr * wd * theta
/// State exists only for the parameters handed in; frozen parameters are
/// excluded by construction.
class AdamW {
 public:
  AdamW(ParamRegistry trainable, const TrainConfig& config);

  /// One update over all trainable parameters. Missing gradients count as
  /// zero; NaN gradients raise NumericError naming the parameter.
  void step(double lr);

  std::size_t step_count() const { return t_; }
  bool has_state_for(std::string_view name) const;
  std::size_t num_slots() const { return slots_.size(); }

  void zero_grads();

 private:
  struct Slot {
    std::string name;
    Tensor param;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

}  // namespace vitdd
