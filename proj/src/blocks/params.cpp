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
#include <numeric>

#include "blocks/blocks.hpp"
#include "common/errors.hpp"

namespace hogformer::blocks {

template <typename T>
Tensor<T> Initializer<T>::conv(Shape shape) {
  std::int64_t fan_in = 1;
  for (std::size_t d = 1; d < shape.size(); ++d) fan_in *= shape[d];
  return normal(std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

template <typename T>
Tensor<T> Initializer<T>::normal(Shape shape, double stddev) {
  std::vector<T> v(static_cast<std::size_t>(numel(shape)));
  for (auto& x : v) x = static_cast<T>(stddev * rng_.truncated_normal());
  return Tensor<T>::from_data(std::move(shape), std::move(v), true);
}

template <typename T>
Tensor<T> Initializer<T>::constant(Shape shape, T value) {
  return Tensor<T>::full(std::move(shape), value, true);
}

template <typename T>
void LdrConvParams<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) {
  fn(prefix + "hog_projection", hog_projection);
  fn(prefix + "pointwise", pointwise);
  fn(prefix + "depthwise", depthwise);
}

template <typename T>
void DhogsaParams<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) {
  if (has_ldr) ldr.visit(prefix + "ldr.", fn);
  fn(prefix + "qkv_pointwise", qkv_pointwise);
  fn(prefix + "qkv_depthwise", qkv_depthwise);
  fn(prefix + "out_pointwise", out_pointwise);
}

template <typename T>
void DiffParams<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) {
  fn(prefix + "expand", expand);
  fn(prefix + "depthwise3", depthwise3);
  if (dynamic) fn(prefix + "depthwise5", depthwise5);
  fn(prefix + "aggregate", aggregate);
}

template <typename T>
void HogtbParams<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) {
  fn(prefix + "norm1.gamma", norm1_gamma);
  fn(prefix + "norm1.beta", norm1_beta);
  attention.visit(prefix + "attn.", fn);
  fn(prefix + "norm2.gamma", norm2_gamma);
  fn(prefix + "norm2.beta", norm2_beta);
  ffn.visit(prefix + "ffn.", fn);
}

template <typename T>
LdrConvParams<T> make_ldrconv(std::int64_t channels, const BlockOptions& opt, Initializer<T>& init) {
  if (channels < 2 || channels % 2 != 0) {
    throw ConfigError("LDRConv needs an even channel count, got " + std::to_string(channels));
  }
  if (opt.n_bin < 1 || opt.ldr_patch < 1) throw ConfigError("LDRConv: n_bin and patch must be >= 1");
  LdrConvParams<T> p;
  p.hog_projection = init.normal({channels / 2, opt.n_bin, 1, 1}, 0.02);
  p.pointwise = init.conv({channels, channels, 1, 1});
  p.depthwise = init.conv({channels, 1, 3, 3});
  p.patch = opt.ldr_patch;
  p.n_bin = opt.n_bin;
  p.unsort = !opt.ldr_no_unsort;
  return p;
}

template <typename T>
DhogsaParams<T> make_dhogsa(std::int64_t channels, int heads, const BlockOptions& opt,
                            Initializer<T>& init) {
  if (heads < 1 || channels % heads != 0) {
    throw ConfigError("attention: " + std::to_string(channels) + " channels not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (opt.use_dhogsa && !opt.use_bhogr && !opt.use_fhogr) {
    throw ConfigError("DHOGSA needs at least one of the BHOGR / FHOGR branches");
  }
  DhogsaParams<T> p;
  p.has_ldr = opt.use_ldrconv;
  if (p.has_ldr) p.ldr = make_ldrconv<T>(channels, opt, init);
  p.hog_sorted = opt.use_dhogsa;
  const std::int64_t k = p.hog_sorted ? 5 : 3;
  p.qkv_pointwise = init.conv({k * channels, channels, 1, 1});
  p.qkv_depthwise = init.conv({k * channels, 1, 3, 3});
  p.out_pointwise = init.conv({channels, channels, 1, 1});
  p.heads = heads;
  p.bins = heads;
  p.n_bin = opt.n_bin;
  p.use_bhogr = opt.use_bhogr;
  p.use_fhogr = opt.use_fhogr;
  p.sqrt_heads_scaling = opt.sqrt_heads_scaling;
  return p;
}

template <typename T>
DiffParams<T> make_diff(std::int64_t channels, const BlockOptions& opt, Initializer<T>& init) {
  if (opt.ffn_expansion < 1) throw ConfigError("FFN expansion must be >= 1");
  const std::int64_t hidden = opt.ffn_expansion * channels;
  DiffParams<T> p;
  p.dynamic = opt.use_diff;
  p.expansion = opt.ffn_expansion;
  p.expand = init.conv({2 * hidden, channels, 1, 1});
  if (p.dynamic) {
    p.depthwise3 = init.conv({hidden, 1, 3, 3});
    p.depthwise5 = init.conv({hidden, 1, 5, 5});
    p.aggregate = init.conv({channels, 2 * hidden, 1, 1});
  } else {
    p.depthwise3 = init.conv({2 * hidden, 1, 3, 3});
    p.aggregate = init.conv({channels, hidden, 1, 1});
  }
  return p;
}

template <typename T>
HogtbParams<T> make_hogtb(std::int64_t channels, int heads, const BlockOptions& opt,
                          Initializer<T>& init) {
  HogtbParams<T> p;
  p.norm1_gamma = init.constant({channels}, T(1));
  p.norm1_beta = init.constant({channels}, T(0));
  p.attention = make_dhogsa<T>(channels, heads, opt, init);
  p.norm2_gamma = init.constant({channels}, T(1));
  p.norm2_beta = init.constant({channels}, T(0));
  p.ffn = make_diff<T>(channels, opt, init);
  return p;
}

std::int64_t hogtb_param_count(std::int64_t c, const BlockOptions& opt) {
  std::int64_t n = 4 * c;  // two layer norms
  if (opt.use_ldrconv) n += (c / 2) * opt.n_bin + c * c + 9 * c;
  const std::int64_t k = opt.use_dhogsa ? 5 : 3;
  n += k * c * c + 9 * k * c + c * c;
  const std::int64_t hidden = opt.ffn_expansion * c;
  n += 2 * hidden * c;
  if (opt.use_diff) {
    n += 9 * hidden + 25 * hidden + 2 * hidden * c;
  } else {
    n += 9 * 2 * hidden + hidden * c;
  }
  return n;
}

int effective_patch(int patch, std::int64_t height, std::int64_t width) {
  return static_cast<int>(std::gcd(std::gcd(static_cast<std::int64_t>(patch), height), width));
}

#define HOGF_INSTANTIATE(T)                                                                   \
  template class Initializer<T>;                                                              \
  template struct LdrConvParams<T>;                                                           \
  template struct DhogsaParams<T>;                                                            \
  template struct DiffParams<T>;                                                              \
  template struct HogtbParams<T>;                                                             \
  template LdrConvParams<T> make_ldrconv(std::int64_t, const BlockOptions&, Initializer<T>&); \
  template DhogsaParams<T> make_dhogsa(std::int64_t, int, const BlockOptions&, Initializer<T>&); \
  template DiffParams<T> make_diff(std::int64_t, const BlockOptions&, Initializer<T>&);       \
  template HogtbParams<T> make_hogtb(std::int64_t, int, const BlockOptions&, Initializer<T>&);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

}  // namespace hogformer::blocks
