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

#include "hog/hog.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "common/errors.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"

namespace hogformer::hog {
namespace {

// One Sobel component over a map padded by one pixel on every side. Taps are
// summed as differences of opposite pixels, so constant regions give exact
// zeros.
template <typename T>
Tensor<T> sobel_component(const Tensor<T>& padded, bool vertical) {
  const std::int64_t NC = padded.dim(0) * padded.dim(1);
  const std::int64_t Hp = padded.dim(2), Wp = padded.dim(3), H = Hp - 2, W = Wp - 2;
  const auto at = [=](std::int64_t plane, std::int64_t y, std::int64_t x) { return (plane * Hp + y) * Wp + x; };
  const auto src = padded.data();
  std::vector<T> out(static_cast<std::size_t>(NC * H * W));
  for (std::int64_t p = 0; p < NC; ++p)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t x = 0; x < W; ++x) {
        T acc;
        if (vertical) {
          acc = (src[at(p, y + 2, x)] - src[at(p, y, x)]) + T(2) * (src[at(p, y + 2, x + 1)] - src[at(p, y, x + 1)]) +
                (src[at(p, y + 2, x + 2)] - src[at(p, y, x + 2)]);
        } else {
          acc = (src[at(p, y, x + 2)] - src[at(p, y, x)]) + T(2) * (src[at(p, y + 1, x + 2)] - src[at(p, y + 1, x)]) +
                (src[at(p, y + 2, x + 2)] - src[at(p, y + 2, x)]);
        }
        out[(p * H + y) * W + x] = acc;
      }
  return make_result<T>(
      Shape{padded.dim(0), padded.dim(1), H, W}, std::move(out), {padded},
      [=](const Node<T>& self) {
        auto* dp = parent_grad(self, 0);
        if (!dp) return;
        auto& d = *dp;
        for (std::int64_t p = 0; p < NC; ++p)
          for (std::int64_t y = 0; y < H; ++y)
            for (std::int64_t x = 0; x < W; ++x) {
              const T g = self.grad[(p * H + y) * W + x];
              if (vertical) {
                for (int k = 0; k < 3; ++k) {
                  const T w = k == 1 ? T(2) : T(1);
                  d[at(p, y + 2, x + k)] += w * g;
                  d[at(p, y, x + k)] -= w * g;
                }
              } else {
                for (int k = 0; k < 3; ++k) {
                  const T w = k == 1 ? T(2) : T(1);
                  d[at(p, y + k, x + 2)] += w * g;
                  d[at(p, y + k, x)] -= w * g;
                }
              }
            }
      });
}

void require_nchw(const Shape& s, const char* op) {
  if (s.size() != 4) throw ConfigError(std::string(op) + ": expected (N, C, H, W), got " + shape_str(s));
}

}  // namespace

double bin_coordinate(double gx, double gy, int n_bin) {
  // Degenerate gradients get a fixed angle so signed zeros cannot flip bins.
  if (gx * gx + gy * gy < kAngleGuard * kAngleGuard) return 0.0;
  const double c = (std::atan2(gy, gx) + std::numbers::pi) / (2.0 * std::numbers::pi) * n_bin;
  return c >= n_bin ? c - n_bin : c;
}

int orientation_bin(double gx, double gy, int n_bin) {
  const int b = static_cast<int>(std::floor(bin_coordinate(gx, gy, n_bin)));
  return b >= n_bin ? 0 : (b < 0 ? 0 : b);
}

template <typename T>
GradientField<T> sobel_gradients(const Tensor<T>& x) {
  require_nchw(x.shape(), "sobel_gradients");
  if (x.dim(2) < 3 || x.dim(3) < 3) {
    throw ConfigError("sobel_gradients: spatial extent " + shape_str(x.shape()) + " below 3x3");
  }
  const auto padded = ops::pad_reflect(x, 1, 1, 1, 1);
  return {sobel_component(padded, false), sobel_component(padded, true)};
}

template <typename T>
MagnitudeOrientation<T> magnitude_orientation(const GradientField<T>& g, int n_bin) {
  if (n_bin < 1) throw ConfigError("magnitude_orientation: n_bin must be >= 1");
  const auto r2 = ops::add(ops::square(g.gx), ops::square(g.gy));
  const T eps = static_cast<T>(kMagnitudeEps);
  auto m = ops::add_scalar(ops::sqrt(ops::add_scalar(r2, eps)), -std::sqrt(eps));
  IndexArray o{g.gx.shape(), std::vector<std::int64_t>(static_cast<std::size_t>(g.gx.numel()))};
  const auto gx = g.gx.data();
  const auto gy = g.gy.data();
  for (std::size_t i = 0; i < o.values.size(); ++i) o.values[i] = orientation_bin(gx[i], gy[i], n_bin);
  return {std::move(m), std::move(o)};
}

template <typename T>
Tensor<T> sort_keys(const Tensor<T>& m, const IndexArray& o) {
  if (o.shape != m.shape()) {
    throw ConfigError("sort_keys: magnitude " + shape_str(m.shape()) + " vs orientation " +
                      shape_str(o.shape));
  }
  std::vector<T> k(static_cast<std::size_t>(m.numel()));
  const auto mv = m.data();
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = mv[i] * static_cast<T>(o.values[i]);
  return Tensor<T>::from_data(m.shape(), std::move(k));
}

template <typename T>
Tensor<T> pixel_keys(const Tensor<T>& x, int n_bin) {
  NoGradGuard no_grad;
  const auto mo = magnitude_orientation(sobel_gradients(x.detach()), n_bin);
  return sort_keys(mo.m, mo.o);
}

template <typename T>
Tensor<T> soft_cell_histogram(const Tensor<T>& x, int cell, int n_bin) {
  require_nchw(x.shape(), "soft_cell_histogram");
  if (n_bin < 1 || cell < 1) throw ConfigError("soft_cell_histogram: cell and n_bin must be >= 1");
  const std::int64_t N = x.dim(0), H = x.dim(2), W = x.dim(3);
  if (H % cell != 0 || W % cell != 0) {
    throw ConfigError("soft_cell_histogram: spatial extent " + std::to_string(H) + "x" +
                      std::to_string(W) + " not divisible by cell " + std::to_string(cell));
  }
  const auto gray = x.dim(1) == 1 ? x : ops::mean_axes(x, {1});
  const auto g = sobel_gradients(gray);
  const std::int64_t cy = H / cell, cx = W / cell;
  const std::size_t npix = static_cast<std::size_t>(N * H * W);

  const auto lower = decide([&] {
    IndexArray lo{Shape{N, 1, H, W}, std::vector<std::int64_t>(npix)};
    const auto gx = g.gx.data();
    const auto gy = g.gy.data();
    for (std::size_t i = 0; i < npix; ++i) {
      lo.values[i] = static_cast<std::int64_t>(std::floor(bin_coordinate(gx[i], gy[i], n_bin)));
    }
    return lo;
  });

  // Per-pixel magnitude and fractional weight toward the upper bin.
  auto mag = std::make_shared<std::vector<T>>(npix);
  auto frac = std::make_shared<std::vector<T>>(npix);
  auto bins = std::make_shared<std::vector<std::int64_t>>(2 * npix);
  {
    const auto gx = g.gx.data();
    const auto gy = g.gy.data();
    for (std::size_t i = 0; i < npix; ++i) {
      const double r2 = static_cast<double>(gx[i]) * gx[i] + static_cast<double>(gy[i]) * gy[i];
      (*mag)[i] = static_cast<T>(std::sqrt(r2 + kMagnitudeEps) - std::sqrt(kMagnitudeEps));
      double c = bin_coordinate(gx[i], gy[i], n_bin);
      const std::int64_t lo = lower.values[i];
      // A replayed bin may sit across the wrap-around from c.
      if (c - static_cast<double>(lo) > 0.5 * n_bin) c -= n_bin;
      if (static_cast<double>(lo) - c > 0.5 * n_bin) c += n_bin;
      (*frac)[i] = static_cast<T>(c - static_cast<double>(lo));
      // Smooth motion moves c at most into a neighbouring bin; a larger jump
      // is the orientation flip of a gradient passing through zero.
      if (replaying() && ((*frac)[i] < -1 || (*frac)[i] > 2)) note_kink();
      const std::int64_t b0 = ((lo % n_bin) + n_bin) % n_bin;
      (*bins)[2 * i] = b0;
      (*bins)[2 * i + 1] = (b0 + 1) % n_bin;
    }
  }

  auto cell_of = [=](std::int64_t n, std::int64_t y, std::int64_t xx) {
    return ((n * cy + y / cell) * cx + xx / cell) * n_bin;
  };

  std::vector<T> hist(static_cast<std::size_t>(N * cy * cx * n_bin), T(0));
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        const std::size_t i = static_cast<std::size_t>((n * H + y) * W + xx);
        const std::int64_t base = cell_of(n, y, xx);
        hist[base + (*bins)[2 * i]] += (*mag)[i] * (T(1) - (*frac)[i]);
        hist[base + (*bins)[2 * i + 1]] += (*mag)[i] * (*frac)[i];
      }

  const T angle_scale = static_cast<T>(n_bin / (2.0 * std::numbers::pi));
  return make_result<T>(
      Shape{N, cy, cx, n_bin}, std::move(hist), {g.gx, g.gy},
      [=](const Node<T>& self) {
        auto* dgx = parent_grad(self, 0);
        auto* dgy = parent_grad(self, 1);
        const auto& gx = self.parents[0]->data;
        const auto& gy = self.parents[1]->data;
        for (std::int64_t n = 0; n < N; ++n)
          for (std::int64_t y = 0; y < H; ++y)
            for (std::int64_t xx = 0; xx < W; ++xx) {
              const std::size_t i = static_cast<std::size_t>((n * H + y) * W + xx);
              const std::int64_t base = cell_of(n, y, xx);
              const T G0 = self.grad[base + (*bins)[2 * i]];
              const T G1 = self.grad[base + (*bins)[2 * i + 1]];
              const T m = (*mag)[i];
              const T f = (*frac)[i];
              // d/dm and d/dc of the two votes.
              const T d_m = G0 * (T(1) - f) + G1 * f;
              const T d_c = (G1 - G0) * m;
              const T r2 = gx[i] * gx[i] + gy[i] * gy[i];
              const T root = std::sqrt(r2 + static_cast<T>(kMagnitudeEps));
              T dcx = 0, dcy = 0;
              if (std::sqrt(r2) >= static_cast<T>(kAngleGuard)) {
                dcx = -gy[i] / r2 * angle_scale;
                dcy = gx[i] / r2 * angle_scale;
              }
              if (dgx) (*dgx)[i] += d_m * gx[i] / root + d_c * dcx;
              if (dgy) (*dgy)[i] += d_m * gy[i] / root + d_c * dcy;
            }
      });
}

template <typename T>
HogMap<T> compute_hog_map(const Tensor<T>& image_chw, int cell, int n_bin) {
  if (image_chw.rank() != 3) {
    throw ConfigError("compute_hog_map: expected (C, H, W), got " + shape_str(image_chw.shape()));
  }
  const auto x = ops::reshape(image_chw, {1, image_chw.dim(0), image_chw.dim(1), image_chw.dim(2)});
  const auto gray = ops::mean_axes(x, {1});
  auto mo = magnitude_orientation(sobel_gradients(gray), n_bin);
  auto hist = soft_cell_histogram(gray, cell, n_bin);
  HogMap<T> out;
  out.m = std::move(mo.m);
  out.o = std::move(mo.o);
  out.soft_hist = ops::reshape(hist, {hist.dim(1), hist.dim(2), hist.dim(3)});
  out.n_bin = n_bin;
  out.cell = cell;
  return out;
}

template <typename T>
SortPlan pixel_sort_plan(const Tensor<T>& keys) {
  SortPlan plan;
  plan.perm = decide([&] { return ops::argsort_stable(keys, -1); });
  plan.inv = ops::invert_permutation(plan.perm, -1);
  plan.granularity = Granularity::kPixel;
  return plan;
}

template <typename T>
SortPlan patch_sort_plan(const Tensor<T>& keys, int patch) {
  require_nchw(keys.shape(), "patch_sort_plan");
  const std::int64_t N = keys.dim(0), C = keys.dim(1), H = keys.dim(2), W = keys.dim(3);
  if (patch < 1 || H % patch != 0 || W % patch != 0) {
    throw ConfigError("patch_sort_plan: spatial extent " + std::to_string(H) + "x" +
                      std::to_string(W) + " not divisible by patch " + std::to_string(patch));
  }
  const std::int64_t py = H / patch, px = W / patch, P = py * px;
  SortPlan plan;
  plan.granularity = Granularity::kPatch;
  plan.patch = patch;
  plan.perm = decide([&] {
    const auto kv = keys.data();
    std::vector<T> pk(static_cast<std::size_t>(N * P), T(0));
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t c = 0; c < C; ++c)
        for (std::int64_t y = 0; y < H; ++y)
          for (std::int64_t x = 0; x < W; ++x)
            pk[n * P + (y / patch) * px + x / patch] += kv[((n * C + c) * H + y) * W + x];
    const T denom = static_cast<T>(C * patch * patch);
    for (auto& v : pk) v /= denom;
    const auto order = ops::argsort_stable(Tensor<T>::from_data({N, P}, std::move(pk)), -1);
    IndexArray perm{Shape{N, 1, H * W}, std::vector<std::int64_t>(static_cast<std::size_t>(N * H * W))};
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t slot = 0; slot < P; ++slot) {
        const std::int64_t src = order.values[n * P + slot];
        const std::int64_t sy = (slot / px) * patch, sx = (slot % px) * patch;
        const std::int64_t ry = (src / px) * patch, rx = (src % px) * patch;
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            perm.values[n * H * W + (sy + dy) * W + sx + dx] = (ry + dy) * W + rx + dx;
      }
    return perm;
  });
  plan.inv = ops::invert_permutation(plan.perm, -1);
  return plan;
}

IndexArray repeat_rows(const IndexArray& plan, std::int64_t channels) {
  if (plan.shape.size() != 3 || plan.shape[1] != 1) {
    throw ConfigError("repeat_rows: expected (N, 1, L) plan, got " + shape_str(plan.shape));
  }
  const std::int64_t N = plan.shape[0], L = plan.shape[2];
  IndexArray out{Shape{N, channels, L}, {}};
  out.values.reserve(static_cast<std::size_t>(N * channels * L));
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t c = 0; c < channels; ++c)
      out.values.insert(out.values.end(), plan.values.begin() + n * L, plan.values.begin() + (n + 1) * L);
  return out;
}

#define HOGF_INSTANTIATE(T)                                                               \
  template GradientField<T> sobel_gradients(const Tensor<T>&);                            \
  template MagnitudeOrientation<T> magnitude_orientation(const GradientField<T>&, int);   \
  template Tensor<T> sort_keys(const Tensor<T>&, const IndexArray&);                      \
  template Tensor<T> pixel_keys(const Tensor<T>&, int);                                   \
  template Tensor<T> soft_cell_histogram(const Tensor<T>&, int, int);                     \
  template HogMap<T> compute_hog_map(const Tensor<T>&, int, int);                         \
  template SortPlan pixel_sort_plan(const Tensor<T>&);                                    \
  template SortPlan patch_sort_plan(const Tensor<T>&, int);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

}  // namespace hogformer::hog
