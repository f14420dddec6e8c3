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

#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "common/errors.hpp"
#include "tensor/gemm.hpp"

namespace hogformer::ops {
namespace {

using Map = std::shared_ptr<const std::vector<std::int64_t>>;

int normalize_axis(int axis, int rank) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    throw ConfigError("axis " + std::to_string(axis) + " out of range for rank " +
                      std::to_string(rank));
  }
  return a;
}

std::vector<std::int64_t> strides_of(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
  return st;
}

// For every element of `out` (row-major), the offset of the element of `in`
// it reads when `in` is broadcast / reduced onto `out`. Axes where the
// extents differ must have extent 1 in `in`.
std::vector<std::int64_t> broadcast_offsets(const Shape& in, const Shape& out) {
  const auto in_st = strides_of(in);
  std::vector<std::int64_t> eff(out.size());
  for (std::size_t d = 0; d < out.size(); ++d) eff[d] = in[d] == out[d] ? in_st[d] : 0;
  const std::int64_t n = numel(out);
  std::vector<std::int64_t> offs(static_cast<std::size_t>(n));
  std::vector<std::int64_t> idx(out.size(), 0);
  std::int64_t off = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    offs[i] = off;
    for (int d = static_cast<int>(out.size()) - 1; d >= 0; --d) {
      if (++idx[d] < out[d]) {
        off += eff[d];
        break;
      }
      off -= eff[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
  return offs;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string(op) + ": rank mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
  Shape out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (a[d] == b[d] || b[d] == 1) {
      out[d] = a[d];
    } else if (a[d] == 1) {
      out[d] = b[d];
    } else {
      throw ConfigError(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " +
                        shape_str(b) + " at axis " + std::to_string(d));
    }
  }
  return out;
}

// out[i] = x[map[i]]; the backward pass accumulates, so non-injective maps
// (padding, upsampling) are fine.
template <typename T>
Tensor<T> remap(const Tensor<T>& x, Shape out_shape, Map map) {
  const auto& src = x.data();
  std::vector<T> out(map->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = src[(*map)[i]];
  return make_result<T>(std::move(out_shape), std::move(out), {x}, [map](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < map->size(); ++i) (*gx)[(*map)[i]] += self.grad[i];
    }
  });
}

template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& x, F f, DF df) {
  const auto& src = x.data();
  std::vector<T> out(src.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(src[i]);
  return make_result<T>(x.shape(), std::move(out), {x}, [df](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      const auto& in = self.parents[0]->data;
      for (std::size_t i = 0; i < in.size(); ++i) (*gx)[i] += self.grad[i] * df(in[i], self.data[i]);
    }
  });
}

template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, const char* name, F f, DA da, DB db) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape(), name);
  const std::int64_t n = numel(out_shape);
  const bool a_full = a.shape() == out_shape;
  const bool b_full = b.shape() == out_shape;
  auto ia = std::make_shared<std::vector<std::int64_t>>();
  auto ib = std::make_shared<std::vector<std::int64_t>>();
  if (!a_full) *ia = broadcast_offsets(a.shape(), out_shape);
  if (!b_full) *ib = broadcast_offsets(b.shape(), out_shape);
  const auto& av = a.data();
  const auto& bv = b.data();
  std::vector<T> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const T x = av[a_full ? i : (*ia)[i]];
    const T y = bv[b_full ? i : (*ib)[i]];
    out[i] = f(x, y);
  }
  return make_result<T>(out_shape, std::move(out), {a, b},
                        [ia, ib, a_full, b_full, da, db](const Node<T>& self) {
                          const auto& x = self.parents[0]->data;
                          const auto& y = self.parents[1]->data;
                          auto* ga = parent_grad(self, 0);
                          auto* gb = parent_grad(self, 1);
                          for (std::size_t i = 0; i < self.grad.size(); ++i) {
                            const std::size_t oa = a_full ? i : (*ia)[i];
                            const std::size_t ob = b_full ? i : (*ib)[i];
                            const T g = self.grad[i];
                            if (ga) (*ga)[oa] += g * da(x[oa], y[ob]);
                            if (gb) (*gb)[ob] += g * db(x[oa], y[ob]);
                          }
                        });
}

void require_rank(const Shape& s, std::size_t rank, const char* op) {
  if (s.size() != rank) {
    throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                      shape_str(s));
  }
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
                [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
                [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; },
                [](T x, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, "div", [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
                [](T x, T y) { return -x / (y * y); });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T s) {
  return unary(x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& x, T s) {
  return unary(x, [s](T v) { return v * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  return unary(
      x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2)); },
      [](T v, T) {
        return T(0.5) * (T(1) + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
      });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::sqrt(v); }, [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
  return unary(
      x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  double s = 0;
  for (T v : x.data()) s += v;
  return make_result<T>({1}, {static_cast<T>(s)}, {x}, [](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      for (auto& g : *gx) g += self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
  return mul_scalar(sum_all(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> sum_axes(const Tensor<T>& x, const std::vector<int>& axes) {
  Shape out_shape = x.shape();
  for (int a : axes) out_shape[normalize_axis(a, x.rank())] = 1;
  // Offsets of each input element inside the output: broadcast the output
  // back onto the input shape.
  auto offs = std::make_shared<std::vector<std::int64_t>>(broadcast_offsets(out_shape, x.shape()));
  std::vector<T> out(static_cast<std::size_t>(numel(out_shape)), T(0));
  const auto& in = x.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[(*offs)[i]] += in[i];
  return make_result<T>(out_shape, std::move(out), {x}, [offs](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += self.grad[(*offs)[i]];
    }
  });
}

template <typename T>
Tensor<T> mean_axes(const Tensor<T>& x, const std::vector<int>& axes) {
  std::int64_t count = 1;
  for (int a : axes) count *= x.dim(a);
  return mul_scalar(sum_axes(x, axes), T(1) / static_cast<T>(count));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ConfigError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), {x}, [](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& order) {
  const int r = x.rank();
  if (static_cast<int>(order.size()) != r) throw ConfigError("permute: order rank mismatch");
  std::vector<bool> used(r, false);
  Shape out_shape(r);
  for (int i = 0; i < r; ++i) {
    const int a = normalize_axis(order[i], r);
    if (used[a]) throw ConfigError("permute: repeated axis");
    used[a] = true;
    out_shape[i] = x.shape()[a];
  }
  const auto in_st = strides_of(x.shape());
  Shape permuted_strides(r);
  for (int i = 0; i < r; ++i) permuted_strides[i] = in_st[normalize_axis(order[i], r)];
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(x.numel()));
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t off = 0;
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    (*map)[i] = off;
    for (int d = r - 1; d >= 0; --d) {
      if (++idx[d] < out_shape[d]) {
        off += permuted_strides[d];
        break;
      }
      off -= permuted_strides[d] * (out_shape[d] - 1);
      idx[d] = 0;
    }
  }
  return remap(x, out_shape, map);
}

template <typename T>
Tensor<T> transpose_last2(const Tensor<T>& x) {
  std::vector<int> order(x.rank());
  std::iota(order.begin(), order.end(), 0);
  std::swap(order[order.size() - 1], order[order.size() - 2]);
  return permute(x, order);
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis) {
  if (xs.empty()) throw ConfigError("concat: no inputs");
  const int r = xs[0].rank();
  const int a = normalize_axis(axis, r);
  Shape out_shape = xs[0].shape();
  out_shape[a] = 0;
  for (const auto& t : xs) {
    for (int d = 0; d < r; ++d) {
      if (d != a && t.shape()[d] != xs[0].shape()[d]) {
        throw ConfigError("concat: mismatched shapes " + shape_str(xs[0].shape()) + " and " +
                          shape_str(t.shape()));
      }
    }
    out_shape[a] += t.shape()[a];
  }
  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < a; ++d) outer *= out_shape[d];
  for (int d = a + 1; d < r; ++d) inner *= out_shape[d];
  std::vector<std::int64_t> extents;
  for (const auto& t : xs) extents.push_back(t.shape()[a]);
  std::vector<T> out(static_cast<std::size_t>(numel(out_shape)));
  const std::int64_t out_row = out_shape[a] * inner;
  std::int64_t base = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& src = xs[k].data();
    const std::int64_t row = extents[k] * inner;
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy_n(src.begin() + o * row, row, out.begin() + o * out_row + base);
    }
    base += row;
  }
  return make_result<T>(out_shape, std::move(out), xs,
                        [extents, outer, inner, out_row](const Node<T>& self) {
                          std::int64_t base = 0;
                          for (std::size_t k = 0; k < extents.size(); ++k) {
                            const std::int64_t row = extents[k] * inner;
                            if (auto* g = parent_grad(self, k)) {
                              for (std::int64_t o = 0; o < outer; ++o) {
                                for (std::int64_t j = 0; j < row; ++j) {
                                  (*g)[o * row + j] += self.grad[o * out_row + base + j];
                                }
                              }
                            }
                            base += row;
                          }
                        });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length) {
  const int a = normalize_axis(axis, x.rank());
  if (start < 0 || length <= 0 || start + length > x.shape()[a]) {
    throw BoundsError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                      ") outside axis of extent " + std::to_string(x.shape()[a]));
  }
  Shape out_shape = x.shape();
  out_shape[a] = length;
  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < a; ++d) outer *= out_shape[d];
  for (int d = a + 1; d < x.rank(); ++d) inner *= out_shape[d];
  auto map = std::make_shared<std::vector<std::int64_t>>();
  map->reserve(static_cast<std::size_t>(numel(out_shape)));
  const std::int64_t in_row = x.shape()[a] * inner;
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t j = 0; j < length * inner; ++j) map->push_back(o * in_row + start * inner + j);
  }
  return remap(x, out_shape, map);
}

// Products at least this large (M*N*K) go to BLAS.
constexpr std::int64_t kGemmThreshold = 4096;

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() < 2 || b.rank() < 2) throw ConfigError("matmul: operands need rank >= 2");
  const std::int64_t M = a.dim(-2), K = a.dim(-1), N = b.dim(-1);
  if (b.dim(-2) != K) {
    throw ConfigError("matmul: inner extents differ, " + shape_str(a.shape()) + " x " +
                      shape_str(b.shape()));
  }
  const bool shared_b = b.rank() == 2 && a.rank() > 2;
  if (!shared_b) {
    if (a.rank() != b.rank() ||
        !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin())) {
      throw ConfigError("matmul: batch extents differ, " + shape_str(a.shape()) + " x " +
                        shape_str(b.shape()));
    }
  }
  const std::int64_t batch = a.numel() / (M * K);
  Shape out_shape = a.shape();
  out_shape.back() = N;
  std::vector<T> out(static_cast<std::size_t>(batch * M * N), T(0));
  const T* A = a.data().data();
  const T* B = b.data().data();
  for (std::int64_t bi = 0; bi < batch; ++bi) {
    const T* Ab = A + bi * M * K;
    const T* Bb = B + (shared_b ? 0 : bi * K * N);
    T* Cb = out.data() + bi * M * N;
    if (M * N * K >= kGemmThreshold) {
      detail::gemm_acc(false, false, M, N, K, Ab, Bb, Cb);
      continue;
    }
    for (std::int64_t i = 0; i < M; ++i) {
      for (std::int64_t k = 0; k < K; ++k) {
        const T av = Ab[i * K + k];
        const T* brow = Bb + k * N;
        T* crow = Cb + i * N;
        for (std::int64_t j = 0; j < N; ++j) crow[j] += av * brow[j];
      }
    }
  }
  return make_result<T>(out_shape, std::move(out), {a, b},
                        [M, K, N, batch, shared_b](const Node<T>& self) {
                          const T* A = self.parents[0]->data.data();
                          const T* B = self.parents[1]->data.data();
                          const T* G = self.grad.data();
                          auto* ga = parent_grad(self, 0);
                          auto* gb = parent_grad(self, 1);
                          for (std::int64_t bi = 0; bi < batch; ++bi) {
                            const T* Ab = A + bi * M * K;
                            const T* Bb = B + (shared_b ? 0 : bi * K * N);
                            const T* Gb = G + bi * M * N;
                            const bool big = M * N * K >= kGemmThreshold;
                            if (ga && big) {
                              detail::gemm_acc(false, true, M, K, N, Gb, Bb, ga->data() + bi * M * K);
                            } else if (ga) {
                              T* dA = ga->data() + bi * M * K;
                              for (std::int64_t i = 0; i < M; ++i) {
                                for (std::int64_t k = 0; k < K; ++k) {
                                  T s = 0;
                                  for (std::int64_t j = 0; j < N; ++j) s += Gb[i * N + j] * Bb[k * N + j];
                                  dA[i * K + k] += s;
                                }
                              }
                            }
                            if (gb && big) {
                              detail::gemm_acc(true, false, K, N, M, Ab, Gb,
                                               gb->data() + (shared_b ? 0 : bi * K * N));
                            } else if (gb) {
                              T* dB = gb->data() + (shared_b ? 0 : bi * K * N);
                              for (std::int64_t i = 0; i < M; ++i) {
                                for (std::int64_t k = 0; k < K; ++k) {
                                  const T av = Ab[i * K + k];
                                  for (std::int64_t j = 0; j < N; ++j) dB[k * N + j] += av * Gb[i * N + j];
                                }
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> softmax_last(const Tensor<T>& x) {
  const std::int64_t L = x.dim(-1);
  const std::int64_t rows = x.numel() / L;
  const auto& in = x.data();
  std::vector<T> out(in.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xr = in.data() + r * L;
    T* yr = out.data() + r * L;
    const T mx = *std::max_element(xr, xr + L);
    T s = 0;
    for (std::int64_t j = 0; j < L; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::int64_t j = 0; j < L; ++j) yr[j] /= s;
  }
  return make_result<T>(x.shape(), std::move(out), {x}, [L, rows](const Node<T>& self) {
    if (auto* gx = parent_grad(self, 0)) {
      for (std::int64_t r = 0; r < rows; ++r) {
        const T* y = self.data.data() + r * L;
        const T* g = self.grad.data() + r * L;
        T dot = 0;
        for (std::int64_t j = 0; j < L; ++j) dot += g[j] * y[j];
        for (std::int64_t j = 0; j < L; ++j) (*gx)[r * L + j] += y[j] * (g[j] - dot);
      }
    }
  });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 Conv2dOptions opt) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(weight.shape(), 4, "conv2d weight");
  const std::int64_t N = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t Cout = weight.dim(0), Cg = weight.dim(1), KH = weight.dim(2), KW = weight.dim(3);
  const int s = opt.stride, p = opt.padding, groups = opt.groups;
  if (groups < 1 || Cin % groups != 0 || Cout % groups != 0) {
    throw ConfigError("conv2d: channels (in " + std::to_string(Cin) + ", out " +
                      std::to_string(Cout) + ") not divisible by groups " + std::to_string(groups));
  }
  if (Cg != Cin / groups) {
    throw ConfigError("conv2d: weight " + shape_str(weight.shape()) + " expects " +
                      std::to_string(Cg * groups) + " input channels, input " +
                      shape_str(x.shape()) + " has " + std::to_string(Cin));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != Cout)) {
    throw ConfigError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                      std::to_string(Cout) + " output channels");
  }
  if (s < 1 || p < 0) throw ConfigError("conv2d: invalid stride/padding");
  if (H + 2 * p < KH || W + 2 * p < KW) {
    throw ConfigError("conv2d: kernel " + shape_str(weight.shape()) + " larger than padded input " +
                      shape_str(x.shape()));
  }
  const std::int64_t Ho = (H + 2 * p - KH) / s + 1;
  const std::int64_t Wo = (W + 2 * p - KW) / s + 1;
  const std::int64_t Cout_g = Cout / groups;
  const bool pointwise = KH == 1 && KW == 1 && s == 1 && p == 0 && groups == 1;

  const T* X = x.data().data();
  const T* Wt = weight.data().data();
  std::vector<T> out(static_cast<std::size_t>(N * Cout * Ho * Wo), T(0));
  if (bias.defined()) {
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t oc = 0; oc < Cout; ++oc)
        std::fill_n(out.begin() + (n * Cout + oc) * Ho * Wo, Ho * Wo, bias.data()[oc]);
  }

  // Column range [lo, hi) of output positions whose input column is in
  // bounds for kernel column kw.
  auto col_range = [=](std::int64_t kw, std::int64_t& lo, std::int64_t& hi) {
    lo = 0;
    while (lo < Wo && lo * s - p + kw < 0) ++lo;
    hi = Wo;
    while (hi > lo && (hi - 1) * s - p + kw >= W) --hi;
  };

  if (pointwise) {
    const std::int64_t HW = H * W;
    for (std::int64_t n = 0; n < N; ++n) {
      detail::gemm_acc(false, false, Cout, HW, Cin, Wt, X + n * Cin * HW, out.data() + n * Cout * HW);
    }
  } else {
    for (std::int64_t n = 0; n < N; ++n) {
      for (std::int64_t oc = 0; oc < Cout; ++oc) {
        const std::int64_t g = oc / Cout_g;
        T* o = out.data() + (n * Cout + oc) * Ho * Wo;
        for (std::int64_t icg = 0; icg < Cg; ++icg) {
          const std::int64_t ic = g * Cg + icg;
          const T* xi = X + (n * Cin + ic) * H * W;
          for (std::int64_t kh = 0; kh < KH; ++kh) {
            for (std::int64_t kw = 0; kw < KW; ++kw) {
              const T w = Wt[((oc * Cg + icg) * KH + kh) * KW + kw];
              std::int64_t lo, hi;
              col_range(kw, lo, hi);
              for (std::int64_t oh = 0; oh < Ho; ++oh) {
                const std::int64_t ih = oh * s - p + kh;
                if (ih < 0 || ih >= H) continue;
                const std::int64_t base = ih * W - p + kw;
                T* orow = o + oh * Wo;
                for (std::int64_t ow = lo; ow < hi; ++ow) orow[ow] += w * xi[base + ow * s];
              }
            }
          }
        }
      }
    }
  }

  Shape out_shape{N, Cout, Ho, Wo};
  return make_result<T>(
      out_shape, std::move(out), {x, weight, bias},
      [=](const Node<T>& self) {
        const T* X = self.parents[0]->data.data();
        const T* Wt = self.parents[1]->data.data();
        const T* G = self.grad.data();
        auto* gx = parent_grad(self, 0);
        auto* gw = parent_grad(self, 1);
        auto* gb = parent_grad(self, 2);
        if (gb) {
          for (std::int64_t n = 0; n < N; ++n)
            for (std::int64_t oc = 0; oc < Cout; ++oc) {
              const T* go = G + (n * Cout + oc) * Ho * Wo;
              T acc = 0;
              for (std::int64_t j = 0; j < Ho * Wo; ++j) acc += go[j];
              (*gb)[oc] += acc;
            }
        }
        if (pointwise) {
          const std::int64_t HW = H * W;
          for (std::int64_t n = 0; n < N; ++n) {
            const T* go = G + n * Cout * HW;
            if (gw) detail::gemm_acc(false, true, Cout, Cin, HW, go, X + n * Cin * HW, gw->data());
            if (gx) detail::gemm_acc(true, false, Cin, HW, Cout, Wt, go, gx->data() + n * Cin * HW);
          }
          return;
        }
        for (std::int64_t n = 0; n < N; ++n) {
          for (std::int64_t oc = 0; oc < Cout; ++oc) {
            const std::int64_t g = oc / Cout_g;
            const T* go = G + (n * Cout + oc) * Ho * Wo;
            for (std::int64_t icg = 0; icg < Cg; ++icg) {
              const std::int64_t ic = g * Cg + icg;
              const T* xi = X + (n * Cin + ic) * H * W;
              T* dxi = gx ? gx->data() + (n * Cin + ic) * H * W : nullptr;
              for (std::int64_t kh = 0; kh < KH; ++kh) {
                for (std::int64_t kw = 0; kw < KW; ++kw) {
                  const std::int64_t widx = ((oc * Cg + icg) * KH + kh) * KW + kw;
                  const T w = Wt[widx];
                  std::int64_t lo, hi;
                  col_range(kw, lo, hi);
                  T acc = 0;
                  for (std::int64_t oh = 0; oh < Ho; ++oh) {
                    const std::int64_t ih = oh * s - p + kh;
                    if (ih < 0 || ih >= H) continue;
                    const T* grow = go + oh * Wo;
                    const std::int64_t base = ih * W - p + kw;
                    if (gw) {
                      for (std::int64_t ow = lo; ow < hi; ++ow) acc += grow[ow] * xi[base + ow * s];
                    }
                    if (dxi) {
                      for (std::int64_t ow = lo; ow < hi; ++ow) dxi[base + ow * s] += w * grow[ow];
                    }
                  }
                  if (gw) (*gw)[widx] += acc;
                }
              }
            }
          }
        }
      });
}

namespace {
std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}
}  // namespace

template <typename T>
Tensor<T> pad_reflect(const Tensor<T>& x, int top, int bottom, int left, int right) {
  require_rank(x.shape(), 4, "pad_reflect");
  if (top < 0 || bottom < 0 || left < 0 || right < 0) throw ConfigError("pad_reflect: negative pad");
  const std::int64_t NC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t Ho = H + top + bottom, Wo = W + left + right;
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(NC * Ho * Wo));
  std::vector<std::int64_t> cols(Wo);
  for (std::int64_t c = 0; c < Wo; ++c) cols[c] = reflect_index(c - left, W);
  std::size_t k = 0;
  for (std::int64_t nc = 0; nc < NC; ++nc)
    for (std::int64_t r = 0; r < Ho; ++r) {
      const std::int64_t row = nc * H * W + reflect_index(r - top, H) * W;
      for (std::int64_t c = 0; c < Wo; ++c) (*map)[k++] = row + cols[c];
    }
  return remap(x, Shape{x.dim(0), x.dim(1), Ho, Wo}, map);
}

template <typename T>
Tensor<T> crop(const Tensor<T>& x, std::int64_t top, std::int64_t left, std::int64_t height,
               std::int64_t width) {
  require_rank(x.shape(), 4, "crop");
  const std::int64_t NC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
  if (top < 0 || left < 0 || height <= 0 || width <= 0 || top + height > H || left + width > W) {
    throw BoundsError("crop window exceeds input " + shape_str(x.shape()));
  }
  auto map = std::make_shared<std::vector<std::int64_t>>();
  map->reserve(static_cast<std::size_t>(NC * height * width));
  for (std::int64_t nc = 0; nc < NC; ++nc)
    for (std::int64_t r = 0; r < height; ++r)
      for (std::int64_t c = 0; c < width; ++c) map->push_back(nc * H * W + (top + r) * W + left + c);
  return remap(x, Shape{x.dim(0), x.dim(1), height, width}, map);
}

template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x, int kernel, int stride, int padding) {
  require_rank(x.shape(), 4, "avg_pool2d");
  if (kernel < 1 || stride < 1 || padding < 0 || padding >= kernel) {
    throw ConfigError("avg_pool2d: invalid kernel/stride/padding");
  }
  const std::int64_t NC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t Ho = (H + 2 * padding - kernel) / stride + 1;
  const std::int64_t Wo = (W + 2 * padding - kernel) / stride + 1;
  if (Ho < 1 || Wo < 1) throw ConfigError("avg_pool2d: window larger than input");
  // Each output is the mean of a list of input offsets.
  auto windows = std::make_shared<std::vector<std::vector<std::int64_t>>>();
  windows->reserve(static_cast<std::size_t>(Ho * Wo));
  for (std::int64_t oh = 0; oh < Ho; ++oh)
    for (std::int64_t ow = 0; ow < Wo; ++ow) {
      std::vector<std::int64_t> win;
      for (int kh = 0; kh < kernel; ++kh)
        for (int kw = 0; kw < kernel; ++kw) {
          const std::int64_t ih = oh * stride - padding + kh, iw = ow * stride - padding + kw;
          if (ih >= 0 && ih < H && iw >= 0 && iw < W) win.push_back(ih * W + iw);
        }
      windows->push_back(std::move(win));
    }
  const auto& in = x.data();
  std::vector<T> out(static_cast<std::size_t>(NC * Ho * Wo));
  for (std::int64_t nc = 0; nc < NC; ++nc)
    for (std::size_t o = 0; o < windows->size(); ++o) {
      const auto& win = (*windows)[o];
      T s = 0;
      for (auto off : win) s += in[nc * H * W + off];
      out[nc * Ho * Wo + o] = s / static_cast<T>(win.size());
    }
  return make_result<T>(Shape{x.dim(0), x.dim(1), Ho, Wo}, std::move(out), {x},
                        [windows, NC, H, W, Ho, Wo](const Node<T>& self) {
                          if (auto* gx = parent_grad(self, 0)) {
                            for (std::int64_t nc = 0; nc < NC; ++nc)
                              for (std::size_t o = 0; o < windows->size(); ++o) {
                                const auto& win = (*windows)[o];
                                const T g = self.grad[nc * Ho * Wo + o] / static_cast<T>(win.size());
                                for (auto off : win) (*gx)[nc * H * W + off] += g;
                              }
                          }
                        });
}

template <typename T>
Tensor<T> layer_norm_channels(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                              T eps) {
  require_rank(x.shape(), 4, "layer_norm_channels");
  const std::int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  if (gamma.numel() != C || beta.numel() != C) {
    throw ConfigError("layer_norm_channels: affine parameters " + shape_str(gamma.shape()) + "/" +
                      shape_str(beta.shape()) + " do not match " + std::to_string(C) + " channels");
  }
  const auto& in = x.data();
  const auto& ga = gamma.data();
  const auto& be = beta.data();
  auto xhat = std::make_shared<std::vector<T>>(in.size());
  auto inv_std = std::make_shared<std::vector<T>>(static_cast<std::size_t>(N * HW));
  std::vector<T> out(in.size());
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t j = 0; j < HW; ++j) {
      const std::int64_t base = n * C * HW + j;
      T mean = 0;
      for (std::int64_t c = 0; c < C; ++c) mean += in[base + c * HW];
      mean /= static_cast<T>(C);
      T var = 0;
      for (std::int64_t c = 0; c < C; ++c) {
        const T d = in[base + c * HW] - mean;
        var += d * d;
      }
      var /= static_cast<T>(C);
      const T is = T(1) / std::sqrt(var + eps);
      (*inv_std)[n * HW + j] = is;
      for (std::int64_t c = 0; c < C; ++c) {
        const T h = (in[base + c * HW] - mean) * is;
        (*xhat)[base + c * HW] = h;
        out[base + c * HW] = h * ga[c] + be[c];
      }
    }
  }
  return make_result<T>(x.shape(), std::move(out), {x, gamma, beta},
                        [xhat, inv_std, N, C, HW](const Node<T>& self) {
                          const auto& ga = self.parents[1]->data;
                          auto* gx = parent_grad(self, 0);
                          auto* gg = parent_grad(self, 1);
                          auto* gb = parent_grad(self, 2);
                          const auto& G = self.grad;
                          for (std::int64_t n = 0; n < N; ++n) {
                            for (std::int64_t j = 0; j < HW; ++j) {
                              const std::int64_t base = n * C * HW + j;
                              T mean_d = 0, mean_dx = 0;
                              for (std::int64_t c = 0; c < C; ++c) {
                                const std::int64_t k = base + c * HW;
                                const T d = G[k] * ga[c];
                                mean_d += d;
                                mean_dx += d * (*xhat)[k];
                                if (gg) (*gg)[c] += G[k] * (*xhat)[k];
                                if (gb) (*gb)[c] += G[k];
                              }
                              if (!gx) continue;
                              mean_d /= static_cast<T>(C);
                              mean_dx /= static_cast<T>(C);
                              const T is = (*inv_std)[n * HW + j];
                              for (std::int64_t c = 0; c < C; ++c) {
                                const std::int64_t k = base + c * HW;
                                (*gx)[k] += is * (G[k] * ga[c] - mean_d - (*xhat)[k] * mean_dx);
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r, ShuffleDirection direction) {
  require_rank(x.shape(), 4, "pixel_shuffle");
  if (r < 1) throw ConfigError("pixel_shuffle: factor must be >= 1");
  const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  // Always describe the map from the low-resolution layout (N, C*r*r, h, w)
  // to the high-resolution one (N, C, h*r, w*r).
  std::int64_t Cl, h, w;
  if (direction == ShuffleDirection::kDown) {
    if (H % r != 0 || W % r != 0) {
      throw ConfigError("pixel_unshuffle: spatial extent " + shape_str(x.shape()) +
                        " not divisible by " + std::to_string(r));
    }
    Cl = C;
    h = H / r;
    w = W / r;
  } else {
    if (C % (r * r) != 0) {
      throw ConfigError("pixel_shuffle: channels " + std::to_string(C) + " not divisible by " +
                        std::to_string(r * r));
    }
    Cl = C / (r * r);
    h = H;
    w = W;
  }
  const std::int64_t total = N * Cl * r * r * h * w;
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(total));
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t c = 0; c < Cl; ++c)
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx)
          for (std::int64_t y = 0; y < h; ++y)
            for (std::int64_t xx = 0; xx < w; ++xx) {
              const std::int64_t lo =
                  (((n * Cl + c) * r * r + dy * r + dx) * h + y) * w + xx;
              const std::int64_t hi = ((n * Cl + c) * h * r + y * r + dy) * w * r + xx * r + dx;
              if (direction == ShuffleDirection::kDown) {
                (*map)[lo] = hi;
              } else {
                (*map)[hi] = lo;
              }
            }
  const Shape out_shape = direction == ShuffleDirection::kDown ? Shape{N, Cl * r * r, h, w}
                                                               : Shape{N, Cl, h * r, w * r};
  return remap(x, out_shape, map);
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, int factor) {
  require_rank(x.shape(), 4, "upsample_nearest");
  if (factor < 1) throw ConfigError("upsample_nearest: factor must be >= 1");
  const std::int64_t NC = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t H = h * factor, W = w * factor;
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(NC * H * W));
  std::size_t k = 0;
  for (std::int64_t nc = 0; nc < NC; ++nc)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) (*map)[k++] = (nc * h + y / factor) * w + xx / factor;
  return remap(x, Shape{x.dim(0), x.dim(1), H, W}, map);
}

template <typename T>
Tensor<T> channel_shuffle(const Tensor<T>& x, int groups) {
  require_rank(x.shape(), 4, "channel_shuffle");
  const std::int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  if (groups < 1 || C % groups != 0) {
    throw ConfigError("channel_shuffle: " + std::to_string(C) + " channels not divisible into " +
                      std::to_string(groups) + " groups");
  }
  const std::int64_t per = C / groups;
  auto map = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(x.numel()));
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t c = 0; c < C; ++c) {
      const std::int64_t src = (c % groups) * per + c / groups;
      for (std::int64_t j = 0; j < HW; ++j) (*map)[(n * C + c) * HW + j] = (n * C + src) * HW + j;
    }
  return remap(x, x.shape(), map);
}

namespace {
struct AxisSplit {
  std::int64_t outer, len, inner;
};

AxisSplit split_axis(const Shape& s, int axis) {
  const int a = normalize_axis(axis, static_cast<int>(s.size()));
  AxisSplit r{1, s[a], 1};
  for (int d = 0; d < a; ++d) r.outer *= s[d];
  for (int d = a + 1; d < static_cast<int>(s.size()); ++d) r.inner *= s[d];
  return r;
}
}  // namespace

template <typename T>
IndexArray argsort_stable(const Tensor<T>& keys, int axis) {
  const auto sp = split_axis(keys.shape(), axis);
  const auto& k = keys.data();
  for (T v : k) {
    if (std::isnan(v)) throw InputError("argsort_stable: NaN sort key");
  }
  IndexArray out{keys.shape(), std::vector<std::int64_t>(k.size())};
  std::vector<std::int64_t> order(static_cast<std::size_t>(sp.len));
  for (std::int64_t o = 0; o < sp.outer; ++o)
    for (std::int64_t in = 0; in < sp.inner; ++in) {
      const std::int64_t base = o * sp.len * sp.inner + in;
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        return k[base + a * sp.inner] < k[base + b * sp.inner];
      });
      for (std::int64_t i = 0; i < sp.len; ++i) out.values[base + i * sp.inner] = order[i];
    }
  return out;
}

IndexArray invert_permutation(const IndexArray& perm, int axis) {
  const auto sp = split_axis(perm.shape, axis);
  IndexArray inv{perm.shape, std::vector<std::int64_t>(perm.values.size(), -1)};
  for (std::int64_t o = 0; o < sp.outer; ++o)
    for (std::int64_t in = 0; in < sp.inner; ++in) {
      const std::int64_t base = o * sp.len * sp.inner + in;
      for (std::int64_t i = 0; i < sp.len; ++i) {
        const std::int64_t p = perm.values[base + i * sp.inner];
        if (p < 0 || p >= sp.len) {
          throw BoundsError("permutation entry " + std::to_string(p) + " outside [0, " +
                            std::to_string(sp.len) + ")");
        }
        auto& slot = inv.values[base + p * sp.inner];
        if (slot != -1) throw InputError("index array is not a permutation (repeated entry)");
        slot = i;
      }
    }
  return inv;
}

template <typename T>
Tensor<T> gather_axis(const Tensor<T>& x, const IndexArray& idx, int axis) {
  if (idx.shape != x.shape()) {
    throw ConfigError("gather_axis: index shape " + shape_str(idx.shape) + " differs from " +
                      shape_str(x.shape()));
  }
  const auto sp = split_axis(x.shape(), axis);
  auto map = std::make_shared<std::vector<std::int64_t>>(idx.values.size());
  for (std::int64_t o = 0; o < sp.outer; ++o)
    for (std::int64_t i = 0; i < sp.len; ++i)
      for (std::int64_t in = 0; in < sp.inner; ++in) {
        const std::int64_t pos = (o * sp.len + i) * sp.inner + in;
        const std::int64_t j = idx.values[pos];
        if (j < 0 || j >= sp.len) {
          throw BoundsError("gather_axis: index " + std::to_string(j) + " outside [0, " +
                            std::to_string(sp.len) + ")");
        }
        (*map)[pos] = (o * sp.len + j) * sp.inner + in;
      }
  return remap(x, x.shape(), map);
}

template <typename T>
Tensor<T> scatter_axis(const Tensor<T>& x, const IndexArray& idx, int axis) {
  return gather_axis(x, invert_permutation(idx, axis), axis);
}

#define HOGF_INSTANTIATE(T)                                                                      \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                            \
  template Tensor<T> mul_scalar(const Tensor<T>&, T);                                            \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                  \
  template Tensor<T> gelu(const Tensor<T>&);                                                     \
  template Tensor<T> abs(const Tensor<T>&);                                                      \
  template Tensor<T> sqrt(const Tensor<T>&);                                                     \
  template Tensor<T> square(const Tensor<T>&);                                                   \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                              \
  template Tensor<T> sum_all(const Tensor<T>&);                                                  \
  template Tensor<T> mean_all(const Tensor<T>&);                                                 \
  template Tensor<T> sum_axes(const Tensor<T>&, const std::vector<int>&);                        \
  template Tensor<T> mean_axes(const Tensor<T>&, const std::vector<int>&);                       \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                           \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<int>&);                         \
  template Tensor<T> transpose_last2(const Tensor<T>&);                                          \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, int);                                 \
  template Tensor<T> slice(const Tensor<T>&, int, std::int64_t, std::int64_t);                   \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> softmax_last(const Tensor<T>&);                                             \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Conv2dOptions); \
  template Tensor<T> pad_reflect(const Tensor<T>&, int, int, int, int);                          \
  template Tensor<T> crop(const Tensor<T>&, std::int64_t, std::int64_t, std::int64_t,            \
                          std::int64_t);                                                         \
  template Tensor<T> avg_pool2d(const Tensor<T>&, int, int, int);                                \
  template Tensor<T> layer_norm_channels(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T); \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, int, ShuffleDirection);                     \
  template Tensor<T> upsample_nearest(const Tensor<T>&, int);                                    \
  template Tensor<T> channel_shuffle(const Tensor<T>&, int);                                     \
  template IndexArray argsort_stable(const Tensor<T>&, int);                                     \
  template Tensor<T> gather_axis(const Tensor<T>&, const IndexArray&, int);                      \
  template Tensor<T> scatter_axis(const Tensor<T>&, const IndexArray&, int);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

}  // namespace hogformer::ops
