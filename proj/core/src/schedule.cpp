#include <cmath>

#include "vitdd/errors.hpp"
#include "vitdd/training.hpp"

namespace vitdd {

std::string_view freeze_policy_name(FreezePolicy p) {
  return p == FreezePolicy::kAllTrainable ? "all" : "msa-only";
}

FreezePolicy parse_freeze_policy(std::string_view s) {
  if (s == "all") return FreezePolicy::kAllTrainable;
  if (s == "msa-only") return FreezePolicy::kMsaOnly;
  throw ConfigError("unknown freeze policy '" + std::string(s) + "' (expected all|msa-only)");
}

void TrainConfig::validate() const {
  if (warmup_epochs >= total_epochs) {
    throw ConfigError("warmup_epochs (" + std::to_string(warmup_epochs) +
                      ") must be smaller than total_epochs (" + std::to_string(total_epochs) + ")");
  }
  if (base_lr < 0 || warmup_start_lr < 0 || final_lr < 0 || weight_decay < 0) {
    throw ConfigError("learning rates and weight decay must be nonnegative");
  }
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
    throw ConfigError("betas must lie in [0, 1)");
  }
  if (adam_eps <= 0) throw ConfigError("adam_eps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

double lr_at(std::size_t step, std::size_t steps_per_epoch, const TrainConfig& config) {
  if (steps_per_epoch == 0) throw ConfigError("lr_at: steps_per_epoch must be positive");
  const std::size_t warmup_steps = config.warmup_epochs * steps_per_epoch;
  const std::size_t total_steps = config.total_epochs * steps_per_epoch;
  if (step > total_steps) return 0.0;
  if (step < warmup_steps) {
    const double frac =
        static_cast<double>(step) / static_cast<double>(warmup_steps);
    return config.warmup_start_lr + (config.base_lr - config.warmup_start_lr) * frac;
  }
  // Half-cosine from base_lr down to final_lr. Endpoints are exact:
  // cos(0) = 1 gives base_lr, cos(pi) = -1 gives final_lr.
  const double frac = static_cast<double>(step - warmup_steps) /
                      static_cast<double>(total_steps - warmup_steps);
  return config.final_lr +
         (config.base_lr - config.final_lr) * 0.5 * (1.0 + std::cos(M_PI * frac));
}

}  // namespace vitdd
