#include "vitdd/augment.hpp"

#include <string>

#include "vitdd/errors.hpp"

namespace vitdd {

Rng augment_rng(std::uint64_t seed, std::string_view sample_id, std::size_t epoch) {
  std::uint64_t h = hash_mix(seed);
  for (char c : sample_id) {
    h = hash_mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  }
  return Rng::derive(h, "augment", epoch);
}

Image augment(const Image& image, Rng& rng, const TrainConfig& config,
              std::size_t target_height, std::size_t target_width) {
  if (image.height < target_height || image.width < target_width) {
    throw DataError("augment: image " + std::to_string(image.width) + "x" +
                    std::to_string(image.height) + " smaller than target " +
                    std::to_string(target_width) + "x" + std::to_string(target_height));
  }
  Image out = image;
  const std::size_t pad = config.augment_pad;
  if (pad > 0) {
    Image padded = pad_zero(out, pad);
    const std::size_t dy = static_cast<std::size_t>(rng.below(padded.height - target_height + 1));
    const std::size_t dx = static_cast<std::size_t>(rng.below(padded.width - target_width + 1));
    out = crop(padded, PixelBox{dx, dy, target_width, target_height});
  } else if (out.height != target_height || out.width != target_width) {
    const std::size_t dy = static_cast<std::size_t>(rng.below(out.height - target_height + 1));
    const std::size_t dx = static_cast<std::size_t>(rng.below(out.width - target_width + 1));
    out = crop(out, PixelBox{dx, dy, target_width, target_height});
  }
  if (config.augment_flip && rng.bernoulli(0.5)) {
    out = flip_horizontal(out);
  }
  return out;
}

}  // namespace vitdd
