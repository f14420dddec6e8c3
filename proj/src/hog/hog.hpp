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

#include "tensor/tensor.hpp"

namespace hogformer::hog {

inline constexpr int kDefaultBins = 9;
inline constexpr int kDefaultCell = 8;
// Added under the square root of the magnitude; the root of the floor is
// subtracted again so a zero gradient has magnitude exactly 0.
inline constexpr double kMagnitudeEps = 1e-12;
// Below this gradient norm the angle carries no gradient.
inline constexpr double kAngleGuard = 1e-8;

template <typename T>
struct GradientField {
  Tensor<T> gx;
  Tensor<T> gy;
};

// Per-channel 3x3 Sobel pair over a reflect-padded (N, C, H, W) map.
// Differentiable; needs H, W >= 3.
template <typename T>
GradientField<T> sobel_gradients(const Tensor<T>& x);

// Continuous orientation coordinate (atan2(gy, gx) + pi) / (2 pi) * n_bin,
// in [0, n_bin].
double bin_coordinate(double gx, double gy, int n_bin);
// floor of bin_coordinate with n_bin wrapped to 0.
int orientation_bin(double gx, double gy, int n_bin);

template <typename T>
struct MagnitudeOrientation {
  Tensor<T> m;   // sqrt(gx^2 + gy^2 + eps) - sqrt(eps), differentiable
  IndexArray o;  // orientation bin per element, constant
};

template <typename T>
MagnitudeOrientation<T> magnitude_orientation(const GradientField<T>& g, int n_bin);

// key = m * o, elementwise. Plain values: keys only feed sort plans.
template <typename T>
Tensor<T> sort_keys(const Tensor<T>& m, const IndexArray& o);

// Per-channel m * o of a feature map, computed without recording a graph.
template <typename T>
Tensor<T> pixel_keys(const Tensor<T>& x, int n_bin);

// Magnitude-weighted orientation histograms over non-overlapping cells of the
// channel-mean of x (N, C, H, W). Each pixel splits its magnitude between the
// two bins around its continuous bin coordinate by linear interpolation,
// circularly. Output (N, H/cell, W/cell, n_bin); differentiable through both
// the magnitude and the interpolation weights.
template <typename T>
Tensor<T> soft_cell_histogram(const Tensor<T>& x, int cell, int n_bin);

// Everything HOG knows about one (C, H, W) map, on its channel mean.
template <typename T>
struct HogMap {
  Tensor<T> m;          // (1, 1, H, W)
  IndexArray o;         // (1, 1, H, W)
  Tensor<T> soft_hist;  // (H/cell, W/cell, n_bin)
  int n_bin = kDefaultBins;
  int cell = kDefaultCell;
};

template <typename T>
HogMap<T> compute_hog_map(const Tensor<T>& image_chw, int cell = kDefaultCell,
                          int n_bin = kDefaultBins);

enum class Granularity { kPixel, kPatch };

// perm sorts, inv undoes: gather_axis(gather_axis(x, perm), inv) == x.
struct SortPlan {
  IndexArray perm;
  IndexArray inv;
  Granularity granularity = Granularity::kPixel;
  int patch = 0;
};

// Stable ascending permutation of the last axis of keys, slice by slice.
template <typename T>
SortPlan pixel_sort_plan(const Tensor<T>& keys);

// keys: (N, C, H, W) pixel keys. One key per patch (mean over the patch of
// the channel-mean key); patches move as whole blocks into raster slots in
// ascending key order. perm/inv have shape (N, 1, H*W).
template <typename T>
SortPlan patch_sort_plan(const Tensor<T>& keys, int patch);

// Repeats a (N, 1, L) plan over `channels` rows: (N, channels, L).
IndexArray repeat_rows(const IndexArray& plan, std::int64_t channels);

}  // namespace hogformer::hog
