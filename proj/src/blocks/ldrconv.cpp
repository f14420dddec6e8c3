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

#include "blocks/blocks.hpp"
#include "common/errors.hpp"
#include "tensor/ops.hpp"

namespace hogformer::blocks {

template <typename T>
Tensor<T> hog_prior_modulation(const Tensor<T>& f1, const LdrConvParams<T>& p, int patch) {
  const auto hist = hog::soft_cell_histogram(f1, patch, p.n_bin);      // (N, cy, cx, n_bin)
  const auto prior = ops::conv2d(ops::permute(hist, {0, 3, 1, 2}), p.hog_projection, Tensor<T>());
  return ops::upsample_nearest(prior, patch);
}

template <typename T>
Tensor<T> ldrconv_forward(const Tensor<T>& f, const LdrConvParams<T>& p) {
  if (f.rank() != 4) throw ConfigError("ldrconv_forward: expected (N, C, H, W), got " + shape_str(f.shape()));
  const std::int64_t N = f.dim(0), C = f.dim(1), H = f.dim(2), W = f.dim(3);
  if (C % 2 != 0) throw ConfigError("ldrconv_forward: odd channel count " + std::to_string(C));
  const std::int64_t half = C / 2;
  const int patch = effective_patch(p.patch, H, W);

  const auto f1 = ops::slice(f, 1, 0, half);
  const auto f2 = ops::slice(f, 1, half, half);
  const auto plan = hog::patch_sort_plan(hog::pixel_keys(f1, p.n_bin), patch);
  const auto perm = hog::repeat_rows(plan.perm, half);

  auto seq = ops::gather_axis(ops::reshape(f1, {N, half, H * W}), perm, -1);
  seq = ops::add(seq, ops::reshape(hog_prior_modulation(f1, p, patch), {N, half, H * W}));
  if (p.unsort) seq = ops::gather_axis(seq, hog::repeat_rows(plan.inv, half), -1);

  const auto merged = ops::concat<T>({ops::reshape(seq, {N, half, H, W}), f2}, 1);
  ops::Conv2dOptions dw;
  dw.padding = 1;
  dw.groups = static_cast<int>(C);
  return ops::conv2d(ops::conv2d(merged, p.pointwise, Tensor<T>()), p.depthwise, Tensor<T>(), dw);
}

template Tensor<float> hog_prior_modulation(const Tensor<float>&, const LdrConvParams<float>&, int);
template Tensor<double> hog_prior_modulation(const Tensor<double>&, const LdrConvParams<double>&, int);
template Tensor<float> ldrconv_forward(const Tensor<float>&, const LdrConvParams<float>&);
template Tensor<double> ldrconv_forward(const Tensor<double>&, const LdrConvParams<double>&);

}  // namespace hogformer::blocks
