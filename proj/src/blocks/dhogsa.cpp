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

#include <cmath>

#include "blocks/blocks.hpp"
#include "common/errors.hpp"
#include "tensor/ops.hpp"

namespace hogformer::blocks {

namespace {

// Swaps the last-but-two and last-but-one axes of a tensor of rank >= 3.
template <typename T>
Tensor<T> swap_minor(const Tensor<T>& x) {
  std::vector<int> order(static_cast<std::size_t>(x.rank()));
  for (int i = 0; i < x.rank(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::swap(order[order.size() - 3], order[order.size() - 2]);
  return ops::permute(x, order);
}

template <typename T>
Tensor<T> segment_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            ReshapeMode mode, int bins, T scale, Tensor<T>* attn_out) {
  const auto qs = histogram_reshape(q, mode, bins);
  const auto ks = histogram_reshape(k, mode, bins);
  const auto vs = histogram_reshape(v, mode, bins);
  const auto attn = ops::softmax_last(ops::mul_scalar(ops::matmul(qs, ops::transpose_last2(ks)), scale));
  if (attn_out != nullptr) *attn_out = attn.detach();
  return histogram_unreshape(ops::matmul(attn, vs), mode, bins);
}

}  // namespace

template <typename T>
Tensor<T> histogram_reshape(const Tensor<T>& seq, ReshapeMode mode, int bins) {
  if (seq.rank() < 2) throw ConfigError("histogram_reshape: rank must be >= 2");
  const std::int64_t L = seq.dim(-1);
  if (bins < 1 || L % bins != 0) {
    throw ConfigError("histogram_reshape: length " + std::to_string(L) +
                      " is not divisible by " + std::to_string(bins) + " bins");
  }
  Shape shape(seq.shape().begin(), seq.shape().end() - 1);
  if (mode == ReshapeMode::kBhogr) {
    shape.push_back(bins);
    shape.push_back(L / bins);
  } else {
    shape.push_back(L / bins);
    shape.push_back(bins);
  }
  return swap_minor(ops::reshape(seq, std::move(shape)));
}

template <typename T>
Tensor<T> histogram_unreshape(const Tensor<T>& segments, ReshapeMode mode, int bins) {
  if (segments.rank() < 3) throw ConfigError("histogram_unreshape: rank must be >= 3");
  const auto expected = mode == ReshapeMode::kBhogr ? segments.dim(-3) : segments.dim(-1);
  if (expected != bins) {
    throw ConfigError("histogram_unreshape: segment layout " + shape_str(segments.shape()) +
                      " does not match " + std::to_string(bins) + " bins");
  }
  const auto swapped = swap_minor(segments);
  Shape shape(swapped.shape().begin(), swapped.shape().end() - 2);
  shape.push_back(swapped.dim(-2) * swapped.dim(-1));
  return ops::reshape(swapped, std::move(shape));
}

template <typename T>
Tensor<T> dhogsa_forward(const Tensor<T>& x, const DhogsaParams<T>& p, DhogsaTrace<T>* trace) {
  if (x.rank() != 4) throw ConfigError("dhogsa_forward: expected (N, C, H, W), got " + shape_str(x.shape()));
  const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), L = H * W;
  const std::int64_t heads = p.heads, d = C / heads;
  if (C % heads != 0) throw ConfigError("dhogsa_forward: channels not divisible by heads");

  const auto x0 = p.has_ldr ? ldrconv_forward(x, p.ldr) : x;
  const std::int64_t k = p.hog_sorted ? 5 : 3;
  ops::Conv2dOptions dw;
  dw.padding = 1;
  dw.groups = static_cast<int>(k * C);
  const auto qkv = ops::conv2d(ops::conv2d(x0, p.qkv_pointwise, Tensor<T>()), p.qkv_depthwise,
                               Tensor<T>(), dw);
  auto part = [&](std::int64_t i) { return ops::slice(qkv, 1, i * C, C); };

  if (!p.hog_sorted) {
    // Transposed channel attention over the full spatial extent.
    auto split = [&](const Tensor<T>& t) { return ops::reshape(t, {N, heads, d, L}); };
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
    const auto attn = ops::softmax_last(
        ops::mul_scalar(ops::matmul(split(part(0)), ops::transpose_last2(split(part(1)))), scale));
    const auto y = ops::reshape(ops::matmul(attn, split(part(2))), {N, C, H, W});
    if (trace != nullptr) trace->before_projection = y.detach();
    return ops::conv2d(y, p.out_pointwise, Tensor<T>());
  }

  if (!p.use_bhogr && !p.use_fhogr) throw ConfigError("DHOGSA needs at least one reshape branch");
  if (L % p.bins != 0) {
    throw ConfigError("dhogsa_forward: H*W = " + std::to_string(L) + " is not divisible by " +
                      std::to_string(p.bins) + " bins");
  }
  const auto v = part(4);
  const auto plan = hog::pixel_sort_plan(ops::reshape(hog::pixel_keys(v, p.n_bin), {N, C, L}));
  auto sorted_heads = [&](const Tensor<T>& t) {
    return ops::reshape(ops::gather_axis(ops::reshape(t, {N, C, L}), plan.perm, -1), {N, heads, d, L});
  };
  const auto vs = sorted_heads(v);

  Tensor<T> fused;
  if (trace != nullptr && trace->identity_attention) {
    fused = vs;
  } else {
    const double denom = p.sqrt_heads_scaling ? static_cast<double>(heads) : static_cast<double>(d);
    const T scale = static_cast<T>(1.0 / std::sqrt(denom));
    Tensor<T> out_b, out_f;
    if (p.use_bhogr) {
      out_b = segment_attention(sorted_heads(part(0)), sorted_heads(part(1)), vs, ReshapeMode::kBhogr,
                                p.bins, scale, trace != nullptr ? &trace->attention_bhogr : nullptr);
    }
    if (p.use_fhogr) {
      out_f = segment_attention(sorted_heads(part(2)), sorted_heads(part(3)), vs, ReshapeMode::kFhogr,
                                p.bins, scale, trace != nullptr ? &trace->attention_fhogr : nullptr);
    }
    if (p.use_bhogr && p.use_fhogr) {
      fused = ops::mul(out_b, out_f);
    } else {
      fused = p.use_bhogr ? out_b : out_f;
    }
  }

  const auto y = ops::reshape(ops::scatter_axis(ops::reshape(fused, {N, C, L}), plan.perm, -1), {N, C, H, W});
  if (trace != nullptr) {
    trace->plan = plan;
    trace->before_projection = y.detach();
  }
  return ops::conv2d(y, p.out_pointwise, Tensor<T>());
}

#define HOGF_INSTANTIATE(T)                                                             \
  template Tensor<T> histogram_reshape(const Tensor<T>&, ReshapeMode, int);             \
  template Tensor<T> histogram_unreshape(const Tensor<T>&, ReshapeMode, int);           \
  template Tensor<T> dhogsa_forward(const Tensor<T>&, const DhogsaParams<T>&, DhogsaTrace<T>*);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

}  // namespace hogformer::blocks
