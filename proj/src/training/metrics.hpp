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

#include "tensor/tensor.hpp"

namespace hogformer::training {

inline constexpr double kPsnrCap = 100.0;

// Images in [0, 1] of equal shape; (C, H, W) or (N, C, H, W).
double mse(const Tensor<float>& a, const Tensor<float>& b);
// 10 log10(1 / MSE); kPsnrCap when MSE < 1e-10.
double psnr(const Tensor<float>& pred, const Tensor<float>& gt);
// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, data range 1)
// over valid window positions, averaged per channel and then over channels
// (and images). Extents below 11 shrink the window to fit.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

}  // namespace hogformer::training
