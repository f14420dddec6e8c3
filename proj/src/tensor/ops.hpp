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

// Differentiable kernels. Image tensors are NCHW. Binary elementwise ops
// broadcast same-rank operands over extents equal to 1.
namespace hogformer::ops {

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, T s);
template <typename T> Tensor<T> mul_scalar(const Tensor<T>& x, T s);

template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(const Tensor<T>& x);
template <typename T> Tensor<T> abs(const Tensor<T>& x);
template <typename T> Tensor<T> sqrt(const Tensor<T>& x);
template <typename T> Tensor<T> square(const Tensor<T>& x);
// Gradient passes only where lo < x < hi.
template <typename T> Tensor<T> clamp(const Tensor<T>& x, T lo, T hi);

template <typename T> Tensor<T> sum_all(const Tensor<T>& x);
template <typename T> Tensor<T> mean_all(const Tensor<T>& x);
// Reduced axes keep extent 1.
template <typename T> Tensor<T> sum_axes(const Tensor<T>& x, const std::vector<int>& axes);
template <typename T> Tensor<T> mean_axes(const Tensor<T>& x, const std::vector<int>& axes);

template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T> Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& order);
template <typename T> Tensor<T> transpose_last2(const Tensor<T>& x);
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis);
template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length);

// (..., M, K) x (..., K, N). Leading extents must agree; a rank-2 `b` is
// shared across the batch.
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Max-subtracted softmax along the last axis.
template <typename T> Tensor<T> softmax_last(const Tensor<T>& x);

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;  // zero fill
  int groups = 1;
};

// x: (N, Cin, H, W), weight: (Cout, Cin/groups, kh, kw), bias: (Cout) or
// undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 Conv2dOptions opt = {});

// Mirror padding without edge repetition; pads wider than the image keep
// reflecting.
template <typename T>
Tensor<T> pad_reflect(const Tensor<T>& x, int top, int bottom, int left, int right);
template <typename T>
Tensor<T> crop(const Tensor<T>& x, std::int64_t top, std::int64_t left, std::int64_t height,
               std::int64_t width);

// Average over the in-bounds part of each window (padding excluded from the
// divisor).
template <typename T> Tensor<T> avg_pool2d(const Tensor<T>& x, int kernel, int stride, int padding);

// Normalizes over C at every (n, h, w). gamma, beta: (C).
template <typename T>
Tensor<T> layer_norm_channels(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                              T eps = T(1e-5));

enum class ShuffleDirection { kUp, kDown };

// kDown: (N, C, H, W) -> (N, C*r*r, H/r, W/r); kUp is its exact inverse.
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r, ShuffleDirection direction);
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int r) {
  return pixel_shuffle(x, r, ShuffleDirection::kDown);
}

// Replicates each pixel into a factor x factor block.
template <typename T> Tensor<T> upsample_nearest(const Tensor<T>& x, int factor);

// Interleaves `groups` equal channel groups: (g0c0, g1c0, g0c1, g1c1, ...).
template <typename T> Tensor<T> channel_shuffle(const Tensor<T>& x, int groups);

// Ascending, ties broken by original index. Same shape as keys.
template <typename T> IndexArray argsort_stable(const Tensor<T>& keys, int axis = -1);
IndexArray invert_permutation(const IndexArray& perm, int axis = -1);

// out[.., i, ..] = x[.., idx[.., i, ..], ..] along `axis`; idx has x's shape.
template <typename T> Tensor<T> gather_axis(const Tensor<T>& x, const IndexArray& idx, int axis = -1);
// out[.., idx[.., i, ..], ..] = x[.., i, ..]; idx must be a permutation per slice.
template <typename T> Tensor<T> scatter_axis(const Tensor<T>& x, const IndexArray& idx, int axis = -1);

}  // namespace hogformer::ops
