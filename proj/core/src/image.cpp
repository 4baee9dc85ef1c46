#include "vitdd/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "vitdd/errors.hpp"

namespace vitdd {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset,
                       const std::string& what) {
  throw FormatError(path.string() + ": " + what + " at byte " + std::to_string(offset));
}

struct ByteReader {
  const std::string& bytes;
  const std::filesystem::path& path;
  std::size_t pos = 0;

  bool eof() const { return pos >= bytes.size(); }

  void skip_space_and_comments() {
    while (!eof()) {
      char c = bytes[pos];
      if (c == '#') {
        while (!eof() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* what) {
    skip_space_and_comments();
    if (eof() || bytes[pos] < '0' || bytes[pos] > '9') {
      fail(path, pos, std::string("expected ") + what);
    }
    std::size_t v = 0;
    while (!eof() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      ++pos;
    }
    return v;
  }
};

}  // namespace

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ByteReader r{bytes, path};
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    fail(path, 0, "expected P6 magic");
  }
  r.pos = 2;
  std::size_t width = r.read_uint("width");
  std::size_t height = r.read_uint("height");
  std::size_t maxval = r.read_uint("maxval");
  if (width == 0 || height == 0) fail(path, r.pos, "zero image dimension");
  if (maxval != 255) fail(path, r.pos, "unsupported maxval " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from pixel data.
  if (r.eof() || !(bytes[r.pos] == '\n' || bytes[r.pos] == ' ' || bytes[r.pos] == '\t' ||
                   bytes[r.pos] == '\r')) {
    fail(path, r.pos, "expected whitespace after maxval");
  }
  ++r.pos;
  const std::size_t want = width * height * 3;
  if (bytes.size() - r.pos < want) {
    fail(path, bytes.size(), "truncated pixel data (want " + std::to_string(want) + " bytes, have " +
                                 std::to_string(bytes.size() - r.pos) + ")");
  }
  Image img(width, height);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + want),
            reinterpret_cast<char*>(img.pixels.data()));
  return img;
}

void save_ppm(const Image& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 ||
      image.pixels.size() != image.width * image.height * 3) {
    throw ContractError("save_ppm: inconsistent image buffer");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write image " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw DataError("short write to " + path.string());
}

Tensor image_to_tensor(const Image& image) {
  Tensor t(Shape{3, image.height, image.width});
  auto v = t.values();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < image.height; ++y)
      for (std::size_t x = 0; x < image.width; ++x)
        v[(c * image.height + y) * image.width + x] =
            (static_cast<double>(image.at(y, x, c)) / 255.0 - 0.5) / 0.5;
  return t;
}

Image tensor_to_image(const Tensor& tensor) {
  if (tensor.rank() != 3 || tensor.dim(0) != 3) {
    throw DimensionError("tensor_to_image: expected [3 x H x W], got " +
                         shape_str(tensor.shape()));
  }
  const std::size_t h = tensor.dim(1), w = tensor.dim(2);
  Image img(w, h);
  auto v = tensor.values();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double u = (v[(c * h + y) * w + x] * 0.5 + 0.5) * 255.0;
        u = std::min(255.0, std::max(0.0, u));
        img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(u));
      }
  return img;
}

Image crop(const Image& image, const PixelBox& box) {
  if (box.w == 0 || box.h == 0 || box.x + box.w > image.width || box.y + box.h > image.height) {
    throw DetectorError("crop box (" + std::to_string(box.x) + ", " + std::to_string(box.y) +
                        ", " + std::to_string(box.w) + ", " + std::to_string(box.h) +
                        ") outside image " + std::to_string(image.width) + "x" +
                        std::to_string(image.height));
  }
  Image out(box.w, box.h);
  for (std::size_t y = 0; y < box.h; ++y)
    for (std::size_t x = 0; x < box.w; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(box.y + y, box.x + x, c);
  return out;
}

std::vector<double> bilinear_resize_values(const Image& image, std::size_t out_w,
                                           std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw DimensionError("bilinear_resize: zero output size");
  std::vector<double> out(out_w * out_h * 3);
  const double sx = static_cast<double>(image.width) / static_cast<double>(out_w);
  const double sy = static_cast<double>(image.height) / static_cast<double>(out_h);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(image.height - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(image.width - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c);
        const double bot = (1.0 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c);
        out[(oy * out_w + ox) * 3 + c] = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

Image bilinear_resize(const Image& image, std::size_t out_w, std::size_t out_h) {
  std::vector<double> vals = bilinear_resize_values(image, out_w, out_h);
  Image out(out_w, out_h);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, vals[i]))));
  }
  return out;
}

Image flip_horizontal(const Image& image) {
  Image out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
  return out;
}

Image pad_zero(const Image& image, std::size_t pad) {
  if (pad == 0) return image;
  Image out(image.width + 2 * pad, image.height + 2 * pad, 0);
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y + pad, x + pad, c) = image.at(y, x, c);
  return out;
}

}  // namespace vitdd
