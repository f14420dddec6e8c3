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

#include "data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace hogformer::data {

namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) { return {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)}; }

// Coverage in [0, 1] of a one-pixel soft edge at signed distance d (< 0 inside).
double coverage(double d) { return std::clamp(0.5 - d, 0.0, 1.0); }

}  // namespace

Tensor<float> synth_clean(std::int64_t H, std::int64_t W, std::uint64_t seed) {
  if (H < 1 || W < 1) throw InputError("synth_clean: extents must be positive");
  Rng rng(seed);
  std::vector<double> img(static_cast<std::size_t>(3 * H * W));
  auto px = [&](int c, std::int64_t y, std::int64_t x) -> double& {
    return img[static_cast<std::size_t>((c * H + y) * W + x)];
  };

  // Vertical sky-to-ground gradient.
  const Color c0 = {rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9)};
  const Color c1 = {rng.uniform(0.1, 0.7), rng.uniform(0.1, 0.7), rng.uniform(0.1, 0.7)};
  for (std::int64_t y = 0; y < H; ++y) {
    const double f = H > 1 ? static_cast<double>(y) / static_cast<double>(H - 1) : 0.0;
    for (std::int64_t x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) px(c, y, x) = c0[c] * (1 - f) + c1[c] * f;
  }

  // Axis-aligned soft-edged blocks, painted back to front.
  const int blocks = 6 + static_cast<int>(rng.below(8));
  for (int s = 0; s < blocks; ++s) {
    const Color col = random_color(rng);
    const double x0 = rng.uniform(-8.0, static_cast<double>(W)), y0 = rng.uniform(-8.0, static_cast<double>(H));
    const double hw = rng.uniform(4.0, 0.5 * W) / 2, hh = rng.uniform(4.0, 0.6 * H) / 2;
    const double cx = x0 + hw, cy = y0 + hh;
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t x = 0; x < W; ++x) {
        const double w = coverage(std::max(std::abs(x - cx) - hw, std::abs(y - cy) - hh));
        if (w <= 0) continue;
        for (int c = 0; c < 3; ++c) px(c, y, x) = px(c, y, x) * (1 - w) + col[c] * w;
      }
  }

  std::vector<float> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = static_cast<float>(std::clamp(img[i], 0.02, 0.98));
  return Tensor<float>::from_data({3, H, W}, std::move(out));
}

Tensor<float> flip_image(const Tensor<float>& x, bool horizontal, bool vertical) {
  const std::int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const auto in = x.data();
  std::vector<float> out(in.size());
  for (std::int64_t c = 0; c < C; ++c)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        const std::int64_t sy = vertical ? H - 1 - y : y;
        const std::int64_t sx = horizontal ? W - 1 - xx : xx;
        out[static_cast<std::size_t>((c * H + y) * W + xx)] = in[(c * H + sy) * W + sx];
      }
  return Tensor<float>::from_data(x.shape(), std::move(out));
}

Tensor<float> crop_image(const Tensor<float>& x, std::int64_t top, std::int64_t left, std::int64_t sh, std::int64_t sw) {
  const std::int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (top < 0 || left < 0 || top + sh > H || left + sw > W) throw BoundsError("crop window outside the image");
  const auto in = x.data();
  std::vector<float> out(static_cast<std::size_t>(C * sh * sw));
  for (std::int64_t c = 0; c < C; ++c)
    for (std::int64_t y = 0; y < sh; ++y)
      std::copy_n(in.begin() + (c * H + top + y) * W + left, sw, out.begin() + (c * sh + y) * sw);
  return Tensor<float>::from_data({C, sh, sw}, std::move(out));
}

std::vector<PatchPair> sample_patches(const Tensor<float>& clean, const Tensor<float>& degraded, std::int64_t size,
                                      int n, std::uint64_t seed, bool flips) {
  if (clean.shape() != degraded.shape() || clean.rank() != 3) {
    throw InputError("sample_patches: clean " + shape_str(clean.shape()) + " and degraded " +
                     shape_str(degraded.shape()) + " must be matching (C, H, W) images");
  }
  const std::int64_t H = clean.dim(1), W = clean.dim(2);
  if (size < 1 || H < size || W < size) {
    throw InputError("sample_patches: image " + std::to_string(H) + "x" + std::to_string(W) +
                     " is smaller than the patch size " + std::to_string(size));
  }
  Rng rng(seed);
  std::vector<PatchPair> out;
  for (int i = 0; i < n; ++i) {
    const auto top = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(H - size + 1)));
    const auto left = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(W - size + 1)));
    const bool fh = flips && rng.coin();
    const bool fv = flips && rng.coin();
    auto take = [&](const Tensor<float>& img) { return flip_image(crop_image(img, top, left, size, size), fh, fv); };
    out.push_back({take(clean), take(degraded)});
  }
  return out;
}

}  // namespace hogformer::data
