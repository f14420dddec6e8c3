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

inline constexpr double kPearsonEps = 1e-8;

struct LossWeights {
  double alpha = 1.0;  // correlation term
  double beta = 1.0;   // HOG term
};

template <typename T>
struct LossTerms {
  Tensor<T> rec;
  Tensor<T> cor;
  Tensor<T> hog;
  Tensor<T> total;
};

// Mean absolute error.
template <typename T>
Tensor<T> rec_loss(const Tensor<T>& pred, const Tensor<T>& gt);

// Mean over images and channels of 1 - rho, with
// rho = cov / sqrt(var_p var_g). A channel whose variance is at most eps in
// either image counts as constant and contributes 1.
template <typename T>
Tensor<T> pearson_loss(const Tensor<T>& pred, const Tensor<T>& gt);

// MSE between soft cell histograms (cell 8, 9 bins) of the channel-mean
// images. Extents that are not cell multiples are reflect-padded.
template <typename T>
Tensor<T> hog_loss(const Tensor<T>& pred, const Tensor<T>& gt, int cell = 8, int n_bin = 9);

// rec + alpha * cor + beta * hog. A zero weight skips its term (reported as
// a zero tensor).
template <typename T>
LossTerms<T> total_loss(const Tensor<T>& pred, const Tensor<T>& gt, const LossWeights& w);

}  // namespace hogformer::training
