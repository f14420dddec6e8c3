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
#include <string>
#include <vector>

#include <json.hpp>

#include "tensor/tensor.hpp"

namespace hogformer::data {

enum class DegradationKind { kIdentity, kNoise, kBlur, kRain, kHaze, kLowlight, kSnow };

const char* kind_name(DegradationKind kind);
DegradationKind kind_from_name(const std::string& name);

// One synthetic degradation. Only the fields of `kind` are used; valid
// ranges are listed next to each field and enforced by validate().
struct DegradationSpec {
  DegradationKind kind = DegradationKind::kIdentity;
  std::uint64_t seed = 0;

  double noise_sigma = 0.1;       // [0, 1]

  double blur_sigma = 1.5;        // (0, 10]

  int rain_count = 80;            // [0, 10000] streaks per 64x64 area
  double rain_length = 18.0;      // [1, 256] px
  double rain_angle = 90.0;       // [0, 180] degrees; 90 is vertical
  double rain_intensity = 0.5;    // [0, 1]
  double rain_width = 0.7;        // [0.2, 5] px, Gaussian profile sigma

  double haze_t = 0.5;            // [0, 1] transmission at unit depth
  double haze_airlight = 0.9;     // [0, 1]
  double haze_depth_near = 0.5;   // [0, 4] depth at the bottom row
  double haze_depth_far = 1.5;    // [0, 4] depth at the top row

  double lowlight_gamma = 2.2;    // [1, 5]
  double lowlight_gain = 0.5;     // (0, 1]

  double snow_density = 0.012;    // [0, 0.2] flakes per pixel
  double snow_size = 1.2;         // [0.3, 10] px radius
  double snow_intensity = 0.9;    // [0, 1]

  // Throws BoundsError listing every out-of-range field with its bounds.
  void validate() const;
  bool operator==(const DegradationSpec&) const = default;
};

// Defaults for `kind` with the given seed.
DegradationSpec default_spec(DegradationKind kind, std::uint64_t seed = 0);

nlohmann::json to_json(const DegradationSpec& spec);
// Keys not relevant to the kind are rejected, as are unknown keys.
DegradationSpec spec_from_json(const nlohmann::json& j);

// clean: (3, H, W) in [0, 1]. Deterministic in (clean, spec); output in [0, 1].
Tensor<float> degrade(const Tensor<float>& clean, const DegradationSpec& spec);

// Separable Gaussian blur with reflect padding (radius ceil(3 sigma)).
Tensor<float> gaussian_blur(const Tensor<float>& image_chw, double sigma);

}  // namespace hogformer::data
