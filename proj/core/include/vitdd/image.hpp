#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vitdd/tensor.hpp"

namespace vitdd {

/// 8-bit RGB raster, interleaved row-major.
struct Image {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  Image() = default;
  Image(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h * 3, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }
};

/// Binary PPM (P6, maxval 255). Malformed input raises FormatError naming the
/// byte offset. Raw pixel bytes round-trip losslessly through save/load.
Image load_ppm(const std::filesystem::path& path);
void save_ppm(const Image& image, const std::filesystem::path& path);

/// [3 x H x W] tensor, per channel (v/255 - 0.5) / 0.5.
Tensor image_to_tensor(const Image& image);
/// Inverse of image_to_tensor with clamping and round-to-nearest.
Image tensor_to_image(const Tensor& tensor);

struct PixelBox {
  std::size_t x = 0, y = 0, w = 0, h = 0;
};

/// Bounds-checked crop; the box must lie fully inside the image.
Image crop(const Image& image, const PixelBox& box);

/// Bilinear resampling with half-pixel centers, per channel, in double
/// precision on the [0, 255] scale. Identity when sizes match.
std::vector<double> bilinear_resize_values(const Image& image, std::size_t out_w,
                                           std::size_t out_h);
/// Same, quantized back to 8 bits (round half away from zero).
Image bilinear_resize(const Image& image, std::size_t out_w, std::size_t out_h);

Image flip_horizontal(const Image& image);

/// Zero-pads `pad` pixels on every side.
Image pad_zero(const Image& image, std::size_t pad);

}  // namespace vitdd
