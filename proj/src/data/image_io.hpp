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

#include <string>

#include "tensor/tensor.hpp"

namespace hogformer::data {

// PNG (8-bit gray/RGB/RGBA; alpha dropped, gray replicated) or binary PPM
// (P6, maxval 255). Returns (3, H, W) in [0, 1]. Format is sniffed from the
// leading bytes, not the extension.
Tensor<float> load_image(const std::string& path);

// Writes PNG unless the path ends in ".ppm". Values are clamped to [0, 1]
// and quantized with round-half-up.
void save_image(const Tensor<float>& image_chw, const std::string& path);

// Round-half-up to the 8-bit grid, returned in [0, 1].
Tensor<float> quantize(const Tensor<float>& image_chw);

Tensor<float> decode_ppm(const std::string& bytes);
std::string encode_ppm(const Tensor<float>& image_chw);

}  // namespace hogformer::data
