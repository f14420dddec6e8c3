/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "data/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <png.h>

#include "common/errors.hpp"

namespace hogformer::data {

namespace {

std::uint8_t to_byte(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open image '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void require_chw(const Tensor<float>& t, const char* what) {
  if (t.rank() != 3 || t.dim(0) != 3) {
    throw InputError(std::string(what) + ": expected a (3, H, W) image, got " + shape_str(t.shape()));
  }
}

Tensor<float> from_interleaved(const std::uint8_t* rgb, std::int64_t H, std::int64_t W) {
  std::vector<float> v(static_cast<std::size_t>(3 * H * W));
  for (std::int64_t i = 0; i < H * W; ++i)
    for (int c = 0; c < 3; ++c) v[static_cast<std::size_t>(c * H * W + i)] = rgb[i * 3 + c] / 255.0f;
  return Tensor<float>::from_data({3, H, W}, std::move(v));
}

std::vector<std::uint8_t> to_interleaved(const Tensor<float>& t) {
  const std::int64_t H = t.dim(1), W = t.dim(2);
  const auto d = t.data();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(3 * H * W));
  for (std::int64_t i = 0; i < H * W; ++i)
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(i * 3 + c)] = to_byte(d[c * H * W + i]);
  return out;
}

Tensor<float> decode_png(const std::string& bytes, const std::string& label) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError("cannot decode PNG '" + label + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("cannot decode PNG '" + label + "': " + msg);
  }
  return from_interleaved(buf.data(), image.height, image.width);
}

}  // namespace

Tensor<float> decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip_space();
    std::int64_t v = 0;
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])) && pos - start < 9) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) throw DecodeError(std::string("PPM header: missing ") + what);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw DecodeError("not a binary PPM (P6) file");
  pos = 2;
  const std::int64_t W = number("width");
  const std::int64_t H = number("height");
  const std::int64_t maxval = number("maxval");
  if (W < 1 || H < 1) throw DecodeError("PPM header: empty image");
  if (maxval != 255) throw DecodeError("PPM: only maxval 255 is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw DecodeError("PPM header: missing separator before pixel data");
  }
  ++pos;
  const auto need = static_cast<std::size_t>(3 * W * H);
  if (bytes.size() - pos < need) {
    throw DecodeError("PPM truncated: expected " + std::to_string(need) + " pixel bytes, found " +
                      std::to_string(bytes.size() - pos));
  }
  return from_interleaved(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), H, W);
}

std::string encode_ppm(const Tensor<float>& image_chw) {
  require_chw(image_chw, "encode_ppm");
  const auto px = to_interleaved(image_chw);
  std::string out = "P6\n" + std::to_string(image_chw.dim(2)) + " " + std::to_string(image_chw.dim(1)) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

Tensor<float> load_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.empty()) throw DecodeError("image '" + path + "' is empty");
  static const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    try {
      return decode_ppm(bytes);
    } catch (const DecodeError& e) {
      throw DecodeError("'" + path + "': " + e.what());
    }
  }
  throw DecodeError("unsupported image format in '" + path + "' (expected PNG or binary PPM)");
}

void save_image(const Tensor<float>& image_chw, const std::string& path) {
  require_chw(image_chw, "save_image");
  const bool ppm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".ppm") == 0;
  if (ppm) {
    const auto bytes = encode_ppm(image_chw);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path + "'");
    return;
  }
  const auto px = to_interleaved(image_chw);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(image_chw.dim(2));
  image.height = static_cast<png_uint_32>(image_chw.dim(1));
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, px.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + image.message);
  }
}

Tensor<float> quantize(const Tensor<float>& image_chw) {
  std::vector<float> v(image_chw.data().begin(), image_chw.data().end());
  for (auto& x : v) x = to_byte(x) / 255.0f;
  return Tensor<float>::from_data(image_chw.shape(), std::move(v));
}

}  // namespace hogformer::data
