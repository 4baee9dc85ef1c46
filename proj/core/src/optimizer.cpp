#include <cmath>

#include "vitdd/errors.hpp"
#include "vitdd/training.hpp"

namespace vitdd {

std::vector<std::string> apply_freeze_policy(const ParamRegistry& registry, FreezePolicy policy) {
  std::vector<std::string> names;
  for (const auto& [name, tensor] : registry) {
    (void)tensor;
    bool trainable = true;
    if (policy == FreezePolicy::kMsaOnly) {
      const bool msa = name.starts_with("blocks.") && name.find(".msa.") != std::string::npos;
      trainable = msa || name.starts_with("heads.") || name.starts_with("class_tokens.");
    }
    if (trainable) names.push_back(name);
  }
  return names;
}

AdamW::AdamW(ParamRegistry trainable, const TrainConfig& config)
    : beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.adam_eps),
      weight_decay_(config.weight_decay) {
  for (auto& [name, param] : trainable) {
    Slot slot;
    slot.name = name;
    slot.param = param;
    slot.m.assign(param.numel(), 0.0);
    slot.v.assign(param.numel(), 0.0);
    slots_.push_back(std::move(slot));
  }
}

bool AdamW::has_state_for(std::string_view name) const {
  for (const Slot& s : slots_) {
    if (s.name == name) return true;
  }
  return false;
}

void AdamW::zero_grads() {
  for (Slot& s : slots_) s.param.zero_grad();
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Slot& slot : slots_) {
    auto theta = slot.param.values();
    const bool has_grad = slot.param.has_grad();
    std::span<const double> g;
    if (has_grad) g = slot.param.grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      if (std::isnan(gi)) {
        throw NumericError("NaN gradient in parameter '" + slot.name + "' at flat index " +
                           std::to_string(i));
      }
      slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * gi;
      slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = slot.m[i] / bc1;
      const double vhat = slot.v[i] / bc2;
      theta[i] = theta[i] - lr * mhat / (std::sqrt(vhat) + eps_) - lr * weight_decay_ * theta[i];
    }
  }
}

}  // namespace vitdd
