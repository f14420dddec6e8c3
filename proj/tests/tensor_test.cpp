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

/**
 * @file tensor_test.cpp
 * @brief Tensor kernels, reverse-mode gradients and the finite-difference checker.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "common/errors.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "test_support.hpp"

using namespace hogformer;
using hogformer::testing_support::normal_tensor;
using hogformer::testing_support::random_tensor;
using hogformer::testing_support::values;

namespace {

using Td = Tensor<double>;
using Tf = Tensor<float>;

IndexArray index_array(Shape shape, std::vector<std::int64_t> v) { return {std::move(shape), std::move(v)}; }

class TensorOpsTest : public ::testing::Test {
 protected:
  Rng rng_{1234};
};

TEST_F(TensorOpsTest, IdentityPointwiseConvIsIdentity) {
  const Tf x = random_tensor<float>({2, 1, 5, 7}, rng_);
  const Tf w = Tf::full({1, 1, 1, 1}, 1.0f);
  const Tf y = ops::conv2d(x, w, Tf{});
  EXPECT_EQ(values(y), values(x));
}

TEST_F(TensorOpsTest, AllOnesKernelCentreValueIsNine) {
  const Tf x = Tf::full({1, 1, 3, 3}, 1.0f);
  const Tf w = Tf::full({1, 1, 3, 3}, 1.0f);
  const Tf y = ops::conv2d(x, w, Tf{}, {.stride = 1, .padding = 1, .groups = 1});
  ASSERT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  EXPECT_FLOAT_EQ(y.at({0, 0, 1, 1}), 9.0f);
  EXPECT_FLOAT_EQ(y.at({0, 0, 0, 0}), 4.0f);
}

TEST_F(TensorOpsTest, DepthwiseConvShapes) {
  const Tf x = random_tensor<float>({1, 4, 6, 6}, rng_);
  const Tf w = random_tensor<float>({4, 1, 3, 3}, rng_);
  const Tf y = ops::conv2d(x, w, Tf{}, {.stride = 1, .padding = 1, .groups = 4});
  EXPECT_EQ(y.shape(), (Shape{1, 4, 6, 6}));
}

TEST_F(TensorOpsTest, ConvOutputExtentFormula) {
  const Tf x = random_tensor<float>({1, 2, 9, 8}, rng_);
  const Tf w = random_tensor<float>({3, 2, 3, 3}, rng_);
  const Tf y = ops::conv2d(x, w, Tf{}, {.stride = 2, .padding = 1, .groups = 1});
  EXPECT_EQ(y.shape(), (Shape{1, 3, 5, 4}));
}

TEST_F(TensorOpsTest, ConvShapeMismatchIsConfigError) {
  const Tf x = random_tensor<float>({1, 3, 4, 4}, rng_);
  const Tf w = random_tensor<float>({2, 2, 3, 3}, rng_);
  EXPECT_THROW(ops::conv2d(x, w, Tf{}), ConfigError);
}

TEST_F(TensorOpsTest, LayerNormExamples) {
  const Tf g1 = Tf::full({2}, 1.0f), b0 = Tf::zeros({2});
  const Tf constant = Tf::full({1, 2, 3, 3}, 0.7f);
  const Tf flat = ops::layer_norm_channels(constant, g1, b0);
  for (float v : flat.data()) EXPECT_NEAR(v, 0.0f, 1e-3f);

  const Tf pair = Tf::from_data({1, 2, 1, 1}, {1.0f, -1.0f});
  const Tf y = ops::layer_norm_channels(pair, g1, b0);
  EXPECT_NEAR(y.data()[0], 1.0f, 1e-4f);
  EXPECT_NEAR(y.data()[1], -1.0f, 1e-4f);

  const Tf x = random_tensor<float>({1, 2, 3, 3}, rng_);
  const Tf b = Tf::from_data({2}, {0.25f, -0.5f});
  const Tf z = ops::layer_norm_channels(x, Tf::zeros({2}), b);
  for (std::int64_t i = 0; i < 9; ++i) {
    EXPECT_FLOAT_EQ(z.data()[i], 0.25f);
    EXPECT_FLOAT_EQ(z.data()[9 + i], -0.5f);
  }
}

TEST_F(TensorOpsTest, SoftmaxExamples) {
  const Td x = Td::from_data({2, 2}, {0.0, 0.0, std::log(2.0), 0.0});
  const Td y = ops::softmax_last(x);
  EXPECT_NEAR(y.data()[0], 0.5, 1e-12);
  EXPECT_NEAR(y.data()[1], 0.5, 1e-12);
  EXPECT_NEAR(y.data()[2], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(y.data()[3], 1.0 / 3.0, 1e-12);
}

TEST_F(TensorOpsTest, SoftmaxIsStableForLargeLogits) {
  const Tf x = Tf::from_data({1, 3}, {1000.0f, 999.0f, -1000.0f});
  const Tf y = ops::softmax_last(x);
  for (float v : y.data()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(y.data()[0] + y.data()[1] + y.data()[2], 1.0f, 1e-6f);
}

TEST_F(TensorOpsTest, ArgsortStableExamples) {
  EXPECT_EQ(ops::argsort_stable(Td::from_data({3}, {0.3, 0.1, 0.2})).values,
            (std::vector<std::int64_t>{1, 2, 0}));
  EXPECT_EQ(ops::argsort_stable(Td::from_data({3}, {0.2, 0.1, 0.2})).values,
            (std::vector<std::int64_t>{1, 0, 2}));
  EXPECT_EQ(ops::argsort_stable(Td::from_data({4}, {-1.0, 0.0, 0.0, 5.0})).values,
            (std::vector<std::int64_t>{0, 1, 2, 3}));
}

TEST_F(TensorOpsTest, ArgsortNanIsInputError) {
  EXPECT_THROW(ops::argsort_stable(Td::from_data({2}, {0.1, std::nan("")})), InputError);
}

TEST_F(TensorOpsTest, GatherExampleAndInverse) {
  const Td x = Td::from_data({3}, {10, 20, 30});
  const IndexArray idx = index_array({3}, {2, 0, 1});
  const Td g = ops::gather_axis(x, idx);
  EXPECT_EQ(values(g), (std::vector<double>{30, 10, 20}));
  EXPECT_EQ(values(ops::scatter_axis(g, idx)), values(x));
}

TEST_F(TensorOpsTest, GatherOutOfRangeIsBoundsError) {
  const Td x = Td::from_data({3}, {10, 20, 30});
  EXPECT_THROW(ops::gather_axis(x, index_array({3}, {0, 1, 3})), BoundsError);
  EXPECT_THROW(ops::scatter_axis(x, index_array({3}, {0, -1, 2})), BoundsError);
}

TEST_F(TensorOpsTest, GatherGradientIsScatterOfUpstream) {
  Td x = Td::from_data({4}, {1, 2, 3, 4}, true);
  const IndexArray idx = index_array({4}, {3, 1, 0, 2});
  ops::sum_all(ops::gather_axis(x, idx)).backward();
  EXPECT_EQ(values(Td::from_data({4}, {x.grad().begin(), x.grad().end()})),
            (std::vector<double>{1, 1, 1, 1}));

  Td y = Td::from_data({4}, {1, 2, 3, 4}, true);
  const Td w = Td::from_data({4}, {10, 20, 30, 40});
  ops::sum_all(ops::mul(ops::gather_axis(y, idx), w)).backward();
  // y[idx[i]] receives w[i].
  EXPECT_EQ(std::vector<double>(y.grad().begin(), y.grad().end()), (std::vector<double>{30, 20, 40, 10}));
}

TEST_F(TensorOpsTest, PixelShuffleShapesAndRoundtrip) {
  const Tf x = random_tensor<float>({1, 1, 4, 4}, rng_);
  const Tf d = ops::pixel_shuffle(x, 2, ops::ShuffleDirection::kDown);
  EXPECT_EQ(d.shape(), (Shape{1, 4, 2, 2}));
  EXPECT_EQ(values(ops::pixel_shuffle(d, 2, ops::ShuffleDirection::kUp)), values(x));
  const Tf u = ops::pixel_shuffle(random_tensor<float>({1, 8, 2, 2}, rng_), 2, ops::ShuffleDirection::kUp);
  EXPECT_EQ(u.shape(), (Shape{1, 2, 4, 4}));
}

TEST_F(TensorOpsTest, PixelShuffleDivisibilityIsConfigError) {
  EXPECT_THROW(ops::pixel_shuffle(random_tensor<float>({1, 1, 5, 4}, rng_), 2, ops::ShuffleDirection::kDown),
               ConfigError);
  EXPECT_THROW(ops::pixel_shuffle(random_tensor<float>({1, 6, 2, 2}, rng_), 2, ops::ShuffleDirection::kUp),
               ConfigError);
}

TEST_F(TensorOpsTest, PrimitiveExamples) {
  EXPECT_DOUBLE_EQ(ops::sigmoid(Td::from_data({1}, {0.0})).item(), 0.5);

  const Td eye = Td::from_data({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const Td a = random_tensor<double>({3, 4}, rng_);
  EXPECT_EQ(values(ops::matmul(eye, a)), values(a));

  const Tf c = Tf::full({1, 1, 4, 4}, 0.375f);
  const Tf pooled = ops::avg_pool2d(c, 2, 2, 0);
  EXPECT_EQ(pooled.shape(), (Shape{1, 1, 2, 2}));
  for (float v : pooled.data()) EXPECT_FLOAT_EQ(v, 0.375f);

  const Tf x = random_tensor<float>({1, 2, 5, 5}, rng_);
  EXPECT_EQ(values(ops::avg_pool2d(x, 1, 1, 0)), values(x));
  EXPECT_EQ(ops::avg_pool2d(x, 3, 1, 1).shape(), x.shape());
}

TEST_F(TensorOpsTest, BroadcastMismatchIsConfigError) {
  EXPECT_THROW(ops::add(Tf::zeros({2, 3}), Tf::zeros({3, 2})), ConfigError);
  EXPECT_EQ(ops::add(Tf::zeros({2, 3}), Tf::zeros({2, 1})).shape(), (Shape{2, 3}));
}

class BackwardTest : public ::testing::Test {
 protected:
  Rng rng_{99};
};

TEST_F(BackwardTest, SumGivesOnes) {
  Td x = random_tensor<double>({2, 3}, rng_, -1, 1, true);
  ops::sum_all(x).backward();
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST_F(BackwardTest, SumOfSquaresGivesTwoX) {
  Td x = random_tensor<double>({5}, rng_, -1, 1, true);
  ops::sum_all(ops::mul(x, x)).backward();
  for (std::int64_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0 * x.data()[i]);
}

TEST_F(BackwardTest, NonScalarIsUsageError) {
  Td x = random_tensor<double>({2}, rng_, -1, 1, true);
  EXPECT_THROW(ops::mul_scalar(x, 2.0).backward(), UsageError);
}

TEST_F(BackwardTest, RepeatedBackwardAccumulates) {
  Td x = random_tensor<double>({3}, rng_, -1, 1, true);
  const Td loss = ops::sum_all(ops::mul_scalar(x, 3.0));
  loss.backward();
  loss.backward();
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 6.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST_F(BackwardTest, UnreachableLeafGetsNoGradient) {
  Td x = random_tensor<double>({3}, rng_, -1, 1, true);
  Td unused = random_tensor<double>({3}, rng_, -1, 1, true);
  ops::sum_all(x).backward();
  EXPECT_FALSE(unused.has_grad());
}

TEST_F(BackwardTest, ConvGradientsMatchFiniteDifferences) {
  const Td x = random_tensor<double>({1, 2, 5, 5}, rng_);
  const Td w = random_tensor<double>({3, 2, 3, 3}, rng_);
  const Td b = random_tensor<double>({3}, rng_);
  const auto r = finite_diff_check(
      [](const std::vector<Td>& in) {
        return ops::sum_all(ops::square(ops::conv2d(in[0], in[1], in[2], {.stride = 1, .padding = 1, .groups = 1})));
      },
      {x, w, b});
  EXPECT_LT(r.max_rel_error, 1e-6);
  EXPECT_EQ(r.coords_checked, x.numel() + w.numel() + b.numel());
}

class FiniteDiffTest : public ::testing::Test {
 protected:
  Rng rng_{7};
};

TEST_F(FiniteDiffTest, SumOfSquaresSelfTest) {
  const auto r = finite_diff_check([](const std::vector<Td>& in) { return ops::sum_all(ops::square(in[0])); },
                                   {Td::from_data({2}, {1.0, 2.0})});
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST_F(FiniteDiffTest, CompositeConvLayerNormSoftmax) {
  const Td x = random_tensor<double>({1, 4, 6, 6}, rng_);
  const Td w = random_tensor<double>({4, 4, 3, 3}, rng_, -0.5, 0.5);
  const Td gamma = random_tensor<double>({4}, rng_, 0.5, 1.5);
  const Td beta = random_tensor<double>({4}, rng_);
  const Td mix = random_tensor<double>({1, 4, 6, 6}, rng_);
  const auto r = finite_diff_check(
      [&](const std::vector<Td>& in) {
        const Td c = ops::conv2d(in[0], in[1], Td{}, {.stride = 1, .padding = 1, .groups = 1});
        const Td n = ops::layer_norm_channels(c, in[2], in[3]);
        return ops::sum_all(ops::mul(ops::softmax_last(n), mix));
      },
      {x, w, gamma, beta});
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST_F(FiniteDiffTest, ConstantFunctionHasZeroGradients) {
  const Td x = random_tensor<double>({4}, rng_);
  const auto r = finite_diff_check(
      [](const std::vector<Td>& in) { return ops::add_scalar(ops::mul_scalar(ops::sum_all(in[0]), 0.0), 3.0); },
      {x});
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_NEAR(r.worst_numeric, 0.0, 1e-10);
}

// Every differentiable primitive on random small shapes.
TEST_F(FiniteDiffTest, PrimitiveSuite) {
  struct Case {
    const char* name;
    std::function<Td(const std::vector<Td>&)> f;
    std::vector<Shape> shapes;
  };
  const Td weights = random_tensor<double>({2, 3, 4, 4}, rng_);
  const std::vector<Case> cases = {
      {"add", [&](auto& in) { return ops::sum_all(ops::mul(ops::add(in[0], in[1]), weights)); }, {{2, 3, 4, 4}, {2, 3, 1, 4}}},
      {"mul", [&](auto& in) { return ops::sum_all(ops::mul(ops::mul(in[0], in[1]), weights)); }, {{2, 3, 4, 4}, {2, 1, 4, 4}}},
      {"div", [&](auto& in) { return ops::sum_all(ops::div(in[0], ops::add_scalar(ops::square(in[1]), 1.0))); }, {{2, 3}, {2, 3}}},
      {"sigmoid", [&](auto& in) { return ops::sum_all(ops::mul(ops::sigmoid(in[0]), weights)); }, {{2, 3, 4, 4}}},
      {"gelu", [&](auto& in) { return ops::sum_all(ops::mul(ops::gelu(in[0]), weights)); }, {{2, 3, 4, 4}}},
      {"sqrt", [&](auto& in) { return ops::sum_all(ops::sqrt(ops::add_scalar(ops::square(in[0]), 0.5))); }, {{3, 3}}},
      {"matmul", [&](auto& in) { return ops::sum_all(ops::square(ops::matmul(in[0], in[1]))); }, {{2, 3, 4}, {2, 4, 5}}},
      {"mean_axes", [&](auto& in) { return ops::sum_all(ops::square(ops::mean_axes(in[0], {1, 3}))); }, {{2, 3, 4, 4}}},
      {"permute", [&](auto& in) { return ops::sum_all(ops::mul(ops::permute(in[0], {0, 2, 1, 3}), ops::permute(weights, {0, 2, 1, 3}))); }, {{2, 3, 4, 4}}},
      {"concat_slice", [&](auto& in) { return ops::sum_all(ops::square(ops::slice(ops::concat<double>({in[0], in[1]}, 1), 1, 1, 3))); }, {{1, 2, 3}, {1, 2, 3}}},
      {"avg_pool", [&](auto& in) { return ops::sum_all(ops::square(ops::avg_pool2d(in[0], 3, 1, 1))); }, {{1, 2, 5, 5}}},
      {"pad_crop", [&](auto& in) { return ops::sum_all(ops::square(ops::crop(ops::pad_reflect(in[0], 2, 1, 1, 2), 1, 1, 4, 5))); }, {{1, 1, 4, 4}}},
      {"pixel_shuffle", [&](auto& in) { return ops::sum_all(ops::mul(ops::pixel_shuffle(ops::pixel_shuffle(in[0], 2, ops::ShuffleDirection::kDown), 2, ops::ShuffleDirection::kUp), weights)); }, {{2, 3, 4, 4}}},
      {"channel_shuffle", [&](auto& in) { return ops::sum_all(ops::mul(ops::channel_shuffle(in[0], 2), in[0])); }, {{1, 4, 2, 2}}},
      {"upsample", [&](auto& in) { return ops::sum_all(ops::square(ops::upsample_nearest(in[0], 2))); }, {{1, 2, 2, 2}}},
      {"softmax", [&](auto& in) { return ops::sum_all(ops::mul(ops::softmax_last(in[0]), weights)); }, {{2, 3, 4, 4}}},
      {"abs", [&](auto& in) { return ops::sum_all(ops::abs(ops::add_scalar(in[0], 3.0))); }, {{4}}},
  };
  for (const auto& c : cases) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Td> in;
      for (const auto& s : c.shapes) in.push_back(random_tensor<double>(s, rng_));
      const auto r = finite_diff_check(c.f, in);
      EXPECT_LT(r.max_rel_error, 1e-5) << c.name << " trial " << trial;
    }
  }
}

class TensorPropertyTest : public ::testing::Test {
 protected:
  Rng rng_{2024};
};

TEST_F(TensorPropertyTest, GatherScatterInverses) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t rows = 1 + static_cast<std::int64_t>(rng_.below(4));
    const std::int64_t len = 1 + static_cast<std::int64_t>(rng_.below(40));
    const Tf x = random_tensor<float>({rows, len}, rng_);
    IndexArray p{{rows, len}, {}};
    for (std::int64_t r = 0; r < rows; ++r) {
      std::vector<std::int64_t> row(static_cast<std::size_t>(len));
      std::iota(row.begin(), row.end(), 0);
      for (std::int64_t i = len - 1; i > 0; --i) std::swap(row[i], row[rng_.below(i + 1)]);
      p.values.insert(p.values.end(), row.begin(), row.end());
    }
    EXPECT_EQ(values(ops::gather_axis(ops::scatter_axis(x, p), p)), values(x));
    EXPECT_EQ(values(ops::scatter_axis(ops::gather_axis(x, p), p)), values(x));
    EXPECT_EQ(values(ops::gather_axis(ops::gather_axis(x, p), ops::invert_permutation(p))), values(x));
  }
}

TEST_F(TensorPropertyTest, SoftmaxRowsAreDistributions) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t rows = 1 + static_cast<std::int64_t>(rng_.below(5));
    const std::int64_t len = 1 + static_cast<std::int64_t>(rng_.below(20));
    const double scale = std::pow(10.0, rng_.uniform(-2, 2));
    const Tf y = ops::softmax_last(normal_tensor<float>({rows, len}, rng_, scale));
    for (std::int64_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::int64_t i = 0; i < len; ++i) {
        const float v = y.data()[r * len + i];
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

}  // namespace
