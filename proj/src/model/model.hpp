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

#include "blocks/blocks.hpp"
#include "model/config.hpp"
#include "tensor/tensor.hpp"

namespace hogformer::model {

template <typename T>
struct CoarseSkipParams {
  Tensor<T> pointwise;  // (C, C, 1, 1)
  Tensor<T> depthwise;  // (C, 1, 3, 3)
  Tensor<T> fuse;       // (C, 2C, 1, 1)
};

template <typename T>
struct Model {
  ModelConfig config;
  Tensor<T> stem;                                        // (C0, 3, 3, 3)
  std::vector<std::vector<blocks::HogtbParams<T>>> encoder;  // one stack per level
  std::vector<Tensor<T>> down;                           // (2C_l, 4C_l, 1, 1)
  std::vector<Tensor<T>> up;                             // (4C_l, 2C_l, 1, 1)
  std::vector<Tensor<T>> skip_fuse;                      // (C_l, 2C_l, 1, 1), concat fusion only
  std::vector<std::vector<blocks::HogtbParams<T>>> decoder;  // levels - 1 stacks
  std::vector<CoarseSkipParams<T>> coarse;
  Tensor<T> head;                                        // (3, C0, 3, 3)

  // Parameters in a fixed order with stable dotted names.
  void visit(const blocks::ParamVisitor<T>& fn);
  std::int64_t param_count();
};

template <typename T>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t seed);

// Same config and values in another precision.
template <typename To, typename From>
Model<To> convert_model(Model<From>& m);

struct Padding {
  std::int64_t height = 0;  // padded extents
  std::int64_t width = 0;
};

// Smallest reflect-padded extent the network accepts for an H x W input.
Padding padded_extent(const ModelConfig& cfg, std::int64_t height, std::int64_t width);

template <typename T>
Tensor<T> coarse_skip_fuse(const Tensor<T>& enc, const Tensor<T>& dec, const CoarseSkipParams<T>& p);

// x: (N, 3, H, W). Returns x + residual, unclamped; differentiable.
template <typename T>
Tensor<T> forward(const Model<T>& m, const Tensor<T>& x);

// User-facing restoration of a (3, H, W) image: no graph, clamped to [0, 1].
Tensor<float> restore_image(const Model<float>& m, const Tensor<float>& image_chw);

}  // namespace hogformer::model
