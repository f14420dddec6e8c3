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

#include "training/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common/errors.hpp"

namespace hogformer::training {

namespace {

void require_same(const Tensor<float>& a, const Tensor<float>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw InputError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  if (a.rank() != 3 && a.rank() != 4) {
    throw InputError(std::string(what) + ": expected (C, H, W) or (N, C, H, W), got " + shape_str(a.shape()));
  }
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double d = i - (size - 1) / 2.0;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Separable valid filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& x, std::int64_t H, std::int64_t W,
                                 const std::vector<double>& k) {
  const auto K = static_cast<std::int64_t>(k.size());
  const std::int64_t Ho = H - K + 1, Wo = W - K + 1;
  std::vector<double> tmp(static_cast<std::size_t>(H * Wo), 0.0);
  for (std::int64_t y = 0; y < H; ++y)
    for (std::int64_t x0 = 0; x0 < Wo; ++x0) {
      double s = 0;
      for (std::int64_t i = 0; i < K; ++i) s += k[i] * x[y * W + x0 + i];
      tmp[y * Wo + x0] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(Ho * Wo), 0.0);
  for (std::int64_t y0 = 0; y0 < Ho; ++y0)
    for (std::int64_t x0 = 0; x0 < Wo; ++x0) {
      double s = 0;
      for (std::int64_t i = 0; i < K; ++i) s += k[i] * tmp[(y0 + i) * Wo + x0];
      out[y0 * Wo + x0] = s;
    }
  return out;
}

}  // namespace

double mse(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "mse");
  double s = 0;
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    s += d * d;
  }
  return s / static_cast<double>(av.size());
}

double psnr(const Tensor<float>& pred, const Tensor<float>& gt) {
  const double m = mse(pred, gt);
  if (m < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "ssim");
  const std::int64_t H = a.dim(-2), W = a.dim(-1);
  const std::int64_t planes = a.numel() / (H * W);
  const int size = static_cast<int>(std::min<std::int64_t>({11, H, W}));
  const auto k = gaussian_window(size, 1.5);
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const auto av = a.data();
  const auto bv = b.data();
  double total = 0;
  for (std::int64_t p = 0; p < planes; ++p) {
    std::vector<double> x(static_cast<std::size_t>(H * W)), y(x.size()), xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = av[p * H * W + i];
      y[i] = bv[p * H * W + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, H, W, k), my = filter_valid(y, H, W, k);
    const auto sxx = filter_valid(xx, H, W, k), syy = filter_valid(yy, H, W, k), sxy = filter_valid(xy, H, W, k);
    double plane = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cxy = sxy[i] - mx[i] * my[i];
      plane += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += plane / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(planes);
}

}  // namespace hogformer::training
