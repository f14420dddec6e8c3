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
#include <functional>
#include <string>

#include "common/rng.hpp"
#include "hog/hog.hpp"
#include "tensor/tensor.hpp"

namespace hogformer::blocks {

// Switches shared by every block of a model. Disabled components fall back
// to standard counterparts (plain transposed attention, gated-dconv FFN).
struct BlockOptions {
  int n_bin = hog::kDefaultBins;
  int ldr_patch = 8;
  int ffn_expansion = 2;
  bool use_ldrconv = true;
  bool use_dhogsa = true;
  bool use_diff = true;
  bool use_bhogr = true;
  bool use_fhogr = true;
  // Divide attention logits by sqrt(heads) instead of sqrt(d_head).
  bool sqrt_heads_scaling = false;
  // Keep LDRConv features in patch-sorted order (no inverse permutation).
  bool ldr_no_unsort = false;
};

template <typename T>
using ParamVisitor = std::function<void(const std::string& name, Tensor<T>& param)>;

// Truncated-normal initializer. Convolutions use std 1/sqrt(fan_in); plain
// linear projections use a fixed std.
template <typename T>
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  Tensor<T> conv(Shape shape);
  Tensor<T> normal(Shape shape, double stddev);
  Tensor<T> constant(Shape shape, T value);

 private:
  Rng rng_;
};

template <typename T>
struct LdrConvParams {
  Tensor<T> hog_projection;  // (C/2, n_bin, 1, 1), bias-free
  Tensor<T> pointwise;       // (C, C, 1, 1)
  Tensor<T> depthwise;       // (C, 1, 3, 3)
  int patch = 8;
  int n_bin = hog::kDefaultBins;
  bool unsort = true;

  void visit(const std::string& prefix, const ParamVisitor<T>& fn);
};

template <typename T>
struct DhogsaParams {
  bool has_ldr = true;
  LdrConvParams<T> ldr;
  // HOG-sorted dual-branch attention: qkv emits Q_B, K_B, Q_F, K_F, V (5C).
  // Standard attention: Q, K, V (3C).
  bool hog_sorted = true;
  Tensor<T> qkv_pointwise;   // (kC, C, 1, 1)
  Tensor<T> qkv_depthwise;   // (kC, 1, 3, 3)
  Tensor<T> out_pointwise;   // (C, C, 1, 1)
  int heads = 1;
  int bins = 1;  // B, equal to heads
  int n_bin = hog::kDefaultBins;
  bool use_bhogr = true;
  bool use_fhogr = true;
  bool sqrt_heads_scaling = false;

  void visit(const std::string& prefix, const ParamVisitor<T>& fn);
};

template <typename T>
struct DiffParams {
  // Dynamic interaction FFN when true, gated-dconv FFN otherwise.
  bool dynamic = true;
  int expansion = 2;
  Tensor<T> expand;       // (2*g*C, C, 1, 1)
  Tensor<T> depthwise3;   // dynamic: (g*C, 1, 3, 3); gated: (2*g*C, 1, 3, 3)
  Tensor<T> depthwise5;   // dynamic only: (g*C, 1, 5, 5)
  Tensor<T> aggregate;    // dynamic: (C, 2*g*C, 1, 1); gated: (C, g*C, 1, 1)

  void visit(const std::string& prefix, const ParamVisitor<T>& fn);
};

template <typename T>
struct HogtbParams {
  Tensor<T> norm1_gamma, norm1_beta;
  Tensor<T> norm2_gamma, norm2_beta;
  DhogsaParams<T> attention;
  DiffParams<T> ffn;

  void visit(const std::string& prefix, const ParamVisitor<T>& fn);
};

template <typename T>
LdrConvParams<T> make_ldrconv(std::int64_t channels, const BlockOptions& opt, Initializer<T>& init);
template <typename T>
DhogsaParams<T> make_dhogsa(std::int64_t channels, int heads, const BlockOptions& opt,
                            Initializer<T>& init);
template <typename T>
DiffParams<T> make_diff(std::int64_t channels, const BlockOptions& opt, Initializer<T>& init);
template <typename T>
HogtbParams<T> make_hogtb(std::int64_t channels, int heads, const BlockOptions& opt,
                          Initializer<T>& init);

// Parameter count of one HOGTB, from shapes alone.
std::int64_t hogtb_param_count(std::int64_t channels, const BlockOptions& opt);

// Patch-level HOG prior: per patch, the soft orientation histogram of the
// channel mean of f1, projected to C/2 values and broadcast over the patch.
template <typename T>
Tensor<T> hog_prior_modulation(const Tensor<T>& f1, const LdrConvParams<T>& p, int patch);

// Patch size actually used on an (H, W) map: the largest divisor of the
// configured patch that also divides H and W.
int effective_patch(int patch, std::int64_t height, std::int64_t width);

template <typename T>
Tensor<T> ldrconv_forward(const Tensor<T>& f, const LdrConvParams<T>& p);

enum class ReshapeMode { kBhogr, kFhogr };

// seq: (..., d, L) sorted along L. BHOGR -> (..., B, d, L/B);
// FHOGR -> (..., L/B, d, B). Segments sit on the third-from-last axis.
template <typename T>
Tensor<T> histogram_reshape(const Tensor<T>& seq, ReshapeMode mode, int bins);
// Exact inverse of histogram_reshape.
template <typename T>
Tensor<T> histogram_unreshape(const Tensor<T>& segments, ReshapeMode mode, int bins);

// Test hooks for dhogsa_forward.
template <typename T>
struct DhogsaTrace {
  // Replace both attention branches and their fusion by the sorted V.
  bool identity_attention = false;
  hog::SortPlan plan;
  Tensor<T> attention_bhogr;  // (N, heads, B, d, d)
  Tensor<T> attention_fhogr;  // (N, heads, L/B, d, d)
  Tensor<T> before_projection;  // (N, C, H, W), after the inverse scatter
};

template <typename T>
Tensor<T> dhogsa_forward(const Tensor<T>& x, const DhogsaParams<T>& p,
                         DhogsaTrace<T>* trace = nullptr);

template <typename T>
Tensor<T> diff_forward(const Tensor<T>& x, const DiffParams<T>& p);

template <typename T>
Tensor<T> hogtb_forward(const Tensor<T>& f, const HogtbParams<T>& p);

}  // namespace hogformer::blocks
