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

#pragma once

#include <cstdint>
#include <vector>

#include "tensor/tensor.hpp"

namespace hogformer::data {

// Deterministic synthetic clean image (3, H, W) in [0.02, 0.98]: a vertical
// colour gradient overlaid with soft-edged axis-aligned blocks.
Tensor<float> synth_clean(std::int64_t height, std::int64_t width, std::uint64_t seed);

struct PatchPair {
  Tensor<float> clean;
  Tensor<float> degraded;
};

// n aligned crops of `size` with the same window and flips for both images.
// Throws InputError if the image is smaller than `size` or shapes differ.
std::vector<PatchPair> sample_patches(const Tensor<float>& clean, const Tensor<float>& degraded, std::int64_t size,
                                      int n, std::uint64_t seed, bool flips);

// Horizontal / vertical flips of a (C, H, W) image.
Tensor<float> flip_image(const Tensor<float>& image_chw, bool horizontal, bool vertical);
Tensor<float> crop_image(const Tensor<float>& image_chw, std::int64_t top, std::int64_t left, std::int64_t size_h,
                         std::int64_t size_w);

}  // namespace hogformer::data
