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
Tensor<T> diff_forward(const Tensor<T>& x, const DiffParams<T>& p) {
  if (x.rank() != 4) throw ConfigError("diff_forward: expected (N, C, H, W), got " + shape_str(x.shape()));
  const std::int64_t hidden = p.expand.dim(0) / 2;
  const auto h = ops::conv2d(x, p.expand, Tensor<T>());
  if (!p.dynamic) {
    ops::Conv2dOptions dw;
    dw.padding = 1;
    dw.groups = static_cast<int>(2 * hidden);
    const auto g = ops::conv2d(h, p.depthwise3, Tensor<T>(), dw);
    const auto y = ops::mul(ops::gelu(ops::slice(g, 1, 0, hidden)), ops::slice(g, 1, hidden, hidden));
    return ops::conv2d(y, p.aggregate, Tensor<T>());
  }
  ops::Conv2dOptions dw3, dw5;
  dw3.padding = 1;
  dw3.groups = static_cast<int>(hidden);
  dw5.padding = 2;
  dw5.groups = static_cast<int>(hidden);
  const auto u = ops::conv2d(ops::slice(h, 1, 0, hidden), p.depthwise3, Tensor<T>(), dw3);
  const auto w = ops::conv2d(ops::slice(h, 1, hidden, hidden), p.depthwise5, Tensor<T>(), dw5);
  const auto u_gated = ops::mul(u, ops::sigmoid(w));
  const auto w_gated = ops::mul(w, ops::sigmoid(u));
  const auto mixed = ops::channel_shuffle(ops::concat<T>({u_gated, w_gated}, 1), 2);
  return ops::conv2d(mixed, p.aggregate, Tensor<T>());
}

template <typename T>
Tensor<T> hogtb_forward(const Tensor<T>& f, const HogtbParams<T>& p) {
  const auto f1 = ops::add(f, dhogsa_forward(ops::layer_norm_channels(f, p.norm1_gamma, p.norm1_beta), p.attention));
  return ops::add(f1, diff_forward(ops::layer_norm_channels(f1, p.norm2_gamma, p.norm2_beta), p.ffn));
}

template Tensor<float> diff_forward(const Tensor<float>&, const DiffParams<float>&);
template Tensor<double> diff_forward(const Tensor<double>&, const DiffParams<double>&);
template Tensor<float> hogtb_forward(const Tensor<float>&, const HogtbParams<float>&);
template Tensor<double> hogtb_forward(const Tensor<double>&, const HogtbParams<double>&);

}  // namespace hogformer::blocks
