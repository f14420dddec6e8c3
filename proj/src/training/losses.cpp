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

#include "training/losses.hpp"

#include "common/errors.hpp"
#include "hog/hog.hpp"
#include "tensor/ops.hpp"

namespace hogformer::training {

namespace {

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw InputError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

template <typename T>
Tensor<T> as_nchw(const Tensor<T>& x) {
  if (x.rank() == 4) return x;
  if (x.rank() == 3) return ops::reshape(x, {1, x.dim(0), x.dim(1), x.dim(2)});
  throw InputError("loss: expected (C, H, W) or (N, C, H, W), got " + shape_str(x.shape()));
}

}  // namespace

template <typename T>
Tensor<T> rec_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  require_same(pred, gt, "rec_loss");
  return ops::mean_all(ops::abs(ops::sub(pred, gt)));
}

template <typename T>
Tensor<T> pearson_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  require_same(pred, gt, "pearson_loss");
  const auto p4 = as_nchw(pred);
  const auto g4 = as_nchw(gt);
  const Shape flat{p4.dim(0), p4.dim(1), p4.dim(2) * p4.dim(3)};
  const auto p = ops::reshape(p4, flat);
  const auto g = ops::reshape(g4.detach(), flat);
  const auto dp = ops::sub(p, ops::mean_axes(p, {2}));
  const auto dg = ops::sub(g, ops::mean_axes(g, {2}));
  const auto cov = ops::mean_axes(ops::mul(dp, dg), {2});
  auto var_p = ops::mean_axes(ops::square(dp), {2});
  auto var_g = ops::mean_axes(ops::square(dg), {2});
  // Constant channels get rho = 0; their variances are lifted to keep the division finite.
  Tensor<T> keep = Tensor<T>::zeros(var_p.shape());
  Tensor<T> lift = Tensor<T>::zeros(var_p.shape());
  for (std::int64_t i = 0; i < keep.numel(); ++i) {
    const bool ok = var_p.data()[i] > static_cast<T>(kPearsonEps) && var_g.data()[i] > static_cast<T>(kPearsonEps);
    keep.data_mut()[i] = ok ? T(1) : T(0);
    lift.data_mut()[i] = ok ? T(0) : T(1);
  }
  var_p = ops::add(var_p, lift);
  var_g = ops::add(var_g, lift);
  const auto rho = ops::mul(ops::div(cov, ops::sqrt(ops::mul(var_p, var_g))), keep);
  return ops::mean_all(ops::add_scalar(ops::mul_scalar(rho, T(-1)), T(1)));
}

template <typename T>
Tensor<T> hog_loss(const Tensor<T>& pred, const Tensor<T>& gt, int cell, int n_bin) {
  require_same(pred, gt, "hog_loss");
  auto p = as_nchw(pred);
  auto g = as_nchw(gt).detach();
  const std::int64_t H = p.dim(2), W = p.dim(3);
  const int pad_h = static_cast<int>((cell - H % cell) % cell);
  const int pad_w = static_cast<int>((cell - W % cell) % cell);
  if (pad_h != 0 || pad_w != 0) {
    p = ops::pad_reflect(p, 0, pad_h, 0, pad_w);
    g = ops::pad_reflect(g, 0, pad_h, 0, pad_w);
  }
  const auto hp = hog::soft_cell_histogram(p, cell, n_bin);
  Tensor<T> hg;
  {
    NoGradGuard no_grad;
    hg = hog::soft_cell_histogram(g, cell, n_bin);
  }
  return ops::mean_all(ops::square(ops::sub(hp, hg)));
}

template <typename T>
LossTerms<T> total_loss(const Tensor<T>& pred, const Tensor<T>& gt, const LossWeights& w) {
  if (!(w.alpha >= 0.0) || !(w.beta >= 0.0)) {
    throw ConfigError("loss weights must be >= 0 (alpha " + std::to_string(w.alpha) + ", beta " +
                      std::to_string(w.beta) + ")");
  }
  LossTerms<T> t;
  t.rec = rec_loss(pred, gt);
  t.cor = w.alpha > 0.0 ? pearson_loss(pred, gt) : Tensor<T>::zeros({1});
  t.hog = w.beta > 0.0 ? hog_loss(pred, gt) : Tensor<T>::zeros({1});
  t.total = t.rec;
  if (w.alpha > 0.0) t.total = ops::add(t.total, ops::mul_scalar(t.cor, static_cast<T>(w.alpha)));
  if (w.beta > 0.0) t.total = ops::add(t.total, ops::mul_scalar(t.hog, static_cast<T>(w.beta)));
  return t;
}

#define HOGF_INSTANTIATE(T)                                                   \
  template Tensor<T> rec_loss(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> pearson_loss(const Tensor<T>&, const Tensor<T>&);        \
  template Tensor<T> hog_loss(const Tensor<T>&, const Tensor<T>&, int, int);  \
  template LossTerms<T> total_loss(const Tensor<T>&, const Tensor<T>&, const LossWeights&);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

}  // namespace hogformer::training
