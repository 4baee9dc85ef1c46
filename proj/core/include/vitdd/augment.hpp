#pragma once

#include "vitdd/image.hpp"
#include "vitdd/rng.hpp"
#include "vitdd/training.hpp"

namespace vitdd {

/// Driver-image augmentation: zero-pad by augment_pad, crop back to the
/// target size at a random offset, then flip horizontally with probability
/// 1/2. Face crops are never augmented; their geometry is fixed by the
/// detector. Draw order (dy, dx, flip) is fixed so streams are reproducible.
Image augment(const Image& image, Rng& rng, const TrainConfig& config, std::size_t target_height,
              std::size_t target_width);

/// Rng stream for one (sample, epoch) pair; independent of batch order and
/// scheduling.
Rng augment_rng(std::uint64_t seed, std::string_view sample_id, std::size_t epoch);

}  // namespace vitdd
