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
 * @file training_test.cpp
 * @brief Losses, Adam, the learning-rate schedule, metrics and the training
 *        loop.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common/errors.hpp"
#include "data/degrade.hpp"
#include "data/synth.hpp"
#include "model/checkpoint.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "training/adam.hpp"
#include "training/losses.hpp"
#include "training/metrics.hpp"
#include "training/trainer.hpp"
#include "test_support.hpp"

using namespace hogformer;
using namespace hogformer::training;
using hogformer::testing_support::random_tensor;
using hogformer::testing_support::TempDir;
using hogformer::testing_support::values;

namespace {

using Td = Tensor<double>;
using Tf = Tensor<float>;

class LossTest : public ::testing::Test {
 protected:
  Rng rng_{201};
};

TEST_F(LossTest, RecLossExamples) {
  const Td gt = random_tensor<double>({1, 3, 8, 8}, rng_, 0, 1);
  EXPECT_EQ(rec_loss(gt, gt).item(), 0.0);
  EXPECT_NEAR(rec_loss(ops::add_scalar(gt, 0.5), gt).item(), 0.5, 1e-12);

  Td pred = random_tensor<double>({1, 3, 8, 8}, rng_, 0, 1, true);
  rec_loss(pred, gt).backward();
  const double n = static_cast<double>(pred.numel());
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    const double sign = pred.data()[i] > gt.data()[i] ? 1.0 : -1.0;
    EXPECT_DOUBLE_EQ(pred.grad()[i], sign / n);
  }
}

TEST_F(LossTest, PearsonLossExamples) {
  const Td gt = random_tensor<double>({1, 3, 8, 8}, rng_, 0, 1);
  EXPECT_NEAR(pearson_loss(ops::add_scalar(ops::mul_scalar(gt, 2.5), -0.3), gt).item(), 0.0, 1e-7);

  // Zero-mean per channel, then negated.
  const Td centred = ops::sub(gt, ops::mean_axes(gt, {2, 3}));
  EXPECT_NEAR(pearson_loss(ops::mul_scalar(centred, -1.0), centred).item(), 2.0, 1e-12);

  EXPECT_NEAR(pearson_loss(Td::full({1, 3, 8, 8}, 0.4), gt).item(), 1.0, 1e-12);

  // Only one channel constant: loss 1 there, 0 on the other two.
  Td mixed = gt.clone_leaf(false);
  for (std::int64_t i = 0; i < 64; ++i) mixed.data_mut()[i] = 0.5;
  EXPECT_NEAR(pearson_loss(mixed, gt).item(), 1.0 / 3.0, 1e-7);
}

TEST_F(LossTest, PearsonIsInvariantUnderPositiveAffineMaps) {
  for (int trial = 0; trial < 20; ++trial) {
    const Td gt = random_tensor<double>({2, 3, 8, 8}, rng_, 0, 1);
    const Td pred = random_tensor<double>({2, 3, 8, 8}, rng_, 0, 1);
    const double a = rng_.uniform(0.1, 10), b = rng_.uniform(-1, 1);
    EXPECT_NEAR(pearson_loss(ops::add_scalar(ops::mul_scalar(pred, a), b), gt).item(), pearson_loss(pred, gt).item(),
                1e-6);
  }
}

TEST_F(LossTest, HogLossExamples) {
  const Td gt = random_tensor<double>({1, 3, 16, 16}, rng_, 0, 1);
  EXPECT_EQ(hog_loss(gt, gt).item(), 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    EXPECT_GE(hog_loss(random_tensor<double>({1, 3, 16, 16}, rng_, 0, 1), gt).item(), 0.0);
  }
  // Extents that are not cell multiples are padded.
  EXPECT_GE(hog_loss(random_tensor<double>({1, 3, 20, 18}, rng_, 0, 1), random_tensor<double>({1, 3, 20, 18}, rng_, 0, 1)).item(), 0.0);
}

TEST_F(LossTest, TotalLossExamples) {
  const Td gt = random_tensor<double>({1, 3, 16, 16}, rng_, 0, 1);
  const Td pred = random_tensor<double>({1, 3, 16, 16}, rng_, 0, 1);
  EXPECT_NEAR(total_loss(gt, gt, {}).total.item(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(total_loss(pred, gt, {0.0, 0.0}).total.item(), rec_loss(pred, gt).item());
  const auto t = total_loss(pred, gt, {0.7, 1.3});
  EXPECT_NEAR(t.total.item(), t.rec.item() + 0.7 * t.cor.item() + 1.3 * t.hog.item(), 1e-12);
  EXPECT_THROW(total_loss(pred, gt, {-1.0, 1.0}), ConfigError);
  EXPECT_THROW(total_loss(pred, ops::slice(gt, 1, 0, 2), {}), InputError);
}

TEST_F(LossTest, DefaultWeightsAreOne) {
  const LossWeights w;
  EXPECT_EQ(w.alpha, 1.0);
  EXPECT_EQ(w.beta, 1.0);
}

TEST_F(LossTest, GradientAtPerfectPredictionIsFinite) {
  const Td gt = random_tensor<double>({1, 3, 16, 16}, rng_, 0, 1);
  Td pred = gt.clone_leaf(true);
  total_loss(pred, gt, {}).total.backward();
  ASSERT_TRUE(pred.has_grad());
  for (double g : pred.grad()) EXPECT_TRUE(std::isfinite(g));
}

TEST_F(LossTest, LossGradientsMatchFiniteDifferences) {
  GradCheckOptions o;
  o.richardson = true;
  o.scale_floor = 1e-3;
  const Td pred = random_tensor<double>({1, 3, 16, 16}, rng_, 0.3, 0.7);
  Td gt = pred.clone_leaf(false);
  for (auto& v : gt.data_mut()) v += (rng_.coin() ? 1 : -1) * rng_.uniform(0.05, 0.25);
  const std::vector<std::pair<const char*, std::function<Td(const Td&)>>> losses = {
      {"rec", [&](const Td& p) { return rec_loss(p, gt); }},
      {"pearson", [&](const Td& p) { return pearson_loss(p, gt); }},
      {"hog", [&](const Td& p) { return hog_loss(p, gt); }},
      {"total", [&](const Td& p) { return total_loss(p, gt, {}).total; }},
  };
  for (const auto& [name, f] : losses) {
    const auto r = finite_diff_check([&](const std::vector<Td>& in) { return f(in[0]); }, {pred}, o);
    EXPECT_LT(r.max_rel_error, 1e-4) << name;
  }
}

class AdamTest : public ::testing::Test {};

TEST_F(AdamTest, FirstStepMovesByLearningRate) {
  Tf p = Tf::full({3}, 0.5f, true);
  Adam adam({{"p", p}});
  for (auto& g : p.grad_mut()) g = 1.0f;
  adam.step(1e-3);
  for (float v : p.data()) EXPECT_NEAR(v - 0.5f, -1e-3 / (1 + 1e-8), 1e-7);
  EXPECT_EQ(adam.steps(), 1);
}

TEST_F(AdamTest, ZeroGradientsLeaveParametersUnchanged) {
  Tf p = Tf::full({3}, 0.5f, true);
  Tf q = Tf::full({2}, -0.25f, true);
  Adam adam({{"p", p}, {"q", q}});
  for (auto& g : p.grad_mut()) g = 0.0f;
  adam.step(1e-2);
  for (float v : p.data()) EXPECT_EQ(v, 0.5f);
  for (float v : q.data()) EXPECT_EQ(v, -0.25f);
}

TEST_F(AdamTest, NonFiniteGradientNamesTheParameter) {
  Tf p = Tf::full({3}, 0.5f, true);
  Tf q = Tf::full({2}, 0.5f, true);
  Adam adam({{"good", p}, {"broken", q}});
  for (auto& g : p.grad_mut()) g = 1.0f;
  q.grad_mut()[1] = std::numeric_limits<float>::quiet_NaN();
  try {
    adam.step(1e-3);
    FAIL() << "NaN gradient accepted";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
  }
  for (float v : p.data()) EXPECT_EQ(v, 0.5f);
}

TEST_F(AdamTest, StateRoundtrips) {
  Tf p = Tf::full({4}, 0.1f, true);
  Adam a({{"p", p}});
  for (int i = 0; i < 3; ++i) {
    for (auto& g : p.grad_mut()) g = 0.3f * (i + 1);
    a.step(1e-2);
  }
  Tf p2 = p.clone_leaf(true);
  Adam b({{"p", p2}});
  b.load_state(a.state());
  for (auto& g : p.grad_mut()) g = -0.2f;
  for (auto& g : p2.grad_mut()) g = -0.2f;
  a.step(1e-2);
  b.step(1e-2);
  EXPECT_EQ(values(p), values(p2));
}

TEST(ScheduleTest, CosineEndpoints) {
  EXPECT_DOUBLE_EQ(cosine_lr(3e-4, 0.0, 0, 100), 3e-4);
  EXPECT_NEAR(cosine_lr(3e-4, 0.0, 50, 100), 1.5e-4, 1e-15);
  EXPECT_NEAR(cosine_lr(3e-4, 1e-5, 100, 100), 1e-5, 1e-15);
  double prev = 1.0;
  for (int s = 0; s <= 100; ++s) {
    const double lr = cosine_lr(1.0, 0.0, s, 100);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

// Gaussian-window SSIM evaluated window by window.
double reference_ssim(const Tf& a, const Tf& b) {
  const std::int64_t C = a.dim(0), H = a.dim(1), W = a.dim(2);
  const int r = 5;
  double w[11][11], wsum = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / (2 * 1.5 * 1.5));
      wsum += w[i][j];
    }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0;
  for (std::int64_t c = 0; c < C; ++c) {
    double acc = 0;
    int count = 0;
    for (std::int64_t y = 0; y + 11 <= H; ++y)
      for (std::int64_t x = 0; x + 11 <= W; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double k = w[i][j] / wsum;
            const double va = a.at({c, y + i, x + j}), vb = b.at({c, y + i, x + j});
            ma += k * va;
            mb += k * vb;
            saa += k * va * va;
            sbb += k * vb * vb;
            sab += k * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    total += acc / count;
  }
  return total / C;
}

class MetricTest : public ::testing::Test {
 protected:
  Rng rng_{301};
};

TEST_F(MetricTest, PsnrOfKnownMse) {
  const Tf a = Tf::full({3, 10, 10}, 0.5f);
  const Tf b = Tf::full({3, 10, 10}, 0.51f);
  EXPECT_NEAR(mse(a, b), 1e-4, 1e-9);
  EXPECT_NEAR(psnr(a, b), 40.0, 0.01);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_EQ(kPsnrCap, 100.0);
}

TEST_F(MetricTest, SsimIdenticalAndSymmetric) {
  const Tf a = random_tensor<float>({3, 24, 20}, rng_, 0, 1);
  const Tf b = random_tensor<float>({3, 24, 20}, rng_, 0, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-9);
  EXPECT_LT(ssim(a, b), 0.5);
}

TEST_F(MetricTest, SsimMatchesWindowedReference) {
  const Tf a = random_tensor<float>({3, 16, 20}, rng_, 0, 1);
  Tf b = a.clone_leaf(false);
  for (auto& v : b.data_mut()) v = std::clamp(v + static_cast<float>(0.1 * rng_.normal()), 0.0f, 1.0f);
  EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-6);
}

TEST_F(MetricTest, ShapeMismatchIsInputError) {
  EXPECT_THROW(psnr(Tf::zeros({3, 4, 4}), Tf::zeros({3, 4, 5})), InputError);
  EXPECT_THROW(ssim(Tf::zeros({3, 4, 4}), Tf::zeros({1, 4, 4})), InputError);
}

// Small in-memory fixture: noisy 32x32 synthetic pairs.
class TrainerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 3; ++i) {
      data::ImageSample s;
      s.id = "s" + std::to_string(i);
      s.clean = data::synth_clean(32, 32, 500 + i);
      s.spec = data::default_spec(data::DegradationKind::kNoise, 600 + i);
      s.degraded = data::degrade(s.clean, s.spec);
      samples_.push_back(s);
    }
  }
  TrainConfig config(std::int64_t steps) const {
    TrainConfig cfg;
    cfg.model = model::preset("tiny");
    cfg.samples = samples_;
    cfg.crop = 32;
    cfg.batch = 1;
    cfg.steps = steps;
    cfg.seed = 3;
    return cfg;
  }
  static std::string read(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  std::vector<data::ImageSample> samples_;
  TempDir dir_{"train"};
};

TEST_F(TrainerTest, ZeroStepsWritesInitialCheckpointAndEmptyLog) {
  auto cfg = config(0);
  cfg.checkpoint_out = dir_.file("init.hogf");
  cfg.log_csv = dir_.file("loss.csv");
  const auto r = train(cfg);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(read(cfg.log_csv), std::string(kLossCsvHeader) + "\n");
  auto loaded = model::load_checkpoint(cfg.checkpoint_out);
  auto fresh = model::build_model<float>(cfg.model, cfg.seed);
  std::vector<std::vector<float>> a, b;
  loaded.model.visit([&](const std::string&, Tf& t) { a.push_back(values(t)); });
  fresh.visit([&](const std::string&, Tf& t) { b.push_back(values(t)); });
  EXPECT_EQ(a, b);
  EXPECT_EQ(loaded.extras.step, 0);
}

TEST_F(TrainerTest, RunsAreDeterministicAndLogged) {
  auto cfg = config(3);
  cfg.log_csv = dir_.file("a.csv");
  const auto a = train(cfg);
  cfg.log_csv = dir_.file("b.csv");
  const auto b = train(cfg);
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.log[i].step, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(a.log[i].total, b.log[i].total);
    EXPECT_NEAR(a.log[i].total, a.log[i].rec + a.log[i].cor + a.log[i].hog, 1e-5 * a.log[i].total);
  }
  EXPECT_EQ(read(dir_.file("a.csv")), read(dir_.file("b.csv")));
  std::istringstream lines(read(dir_.file("a.csv")));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "step,l_rec,l_cor,l_hog,total,lr");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(TrainerTest, ResumeContinuesTheSameTrajectory) {
  auto full = config(4);
  const auto reference = train(full);

  auto first = config(4);
  first.checkpoint_out = dir_.file("part.hogf");
  first.checkpoint_every = 2;
  first.log_csv = dir_.file("part.csv");
  EXPECT_THROW(train(first, [](const StepRecord& r) {
                 if (r.step == 3) throw std::runtime_error("interrupted");
               }),
               std::runtime_error);

  auto second = config(4);
  second.resume = dir_.file("part.hogf");
  second.log_csv = dir_.file("part.csv");
  auto resumed = train(second);
  ASSERT_EQ(resumed.log.size(), 2u);
  EXPECT_EQ(resumed.log[0].step, 3);
  EXPECT_EQ(resumed.log[1].total, reference.log[3].total);

  std::vector<std::vector<float>> a, b;
  auto m1 = reference.model;
  m1.visit([&](const std::string&, Tf& t) { a.push_back(values(t)); });
  resumed.model.visit([&](const std::string&, Tf& t) { b.push_back(values(t)); });
  EXPECT_EQ(a, b);
}

TEST_F(TrainerTest, AllComponentsOffStillTrains) {
  auto cfg = config(2);
  cfg.model.ldrconv = cfg.model.dhogsa = cfg.model.diff = cfg.model.hog_loss = false;
  const auto r = train(cfg);
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log[0].hog, 0.0);
}

TEST_F(TrainerTest, BadInputsAbortBeforeTheFirstStep) {
  auto cfg = config(2);
  cfg.crop = 64;
  cfg.log_csv = dir_.file("never.csv");
  EXPECT_THROW(train(cfg), InputError);
  EXPECT_FALSE(std::filesystem::exists(cfg.log_csv));

  auto missing = config(2);
  missing.samples.clear();
  missing.manifest = dir_.file("absent.json");
  EXPECT_ANY_THROW(train(missing));

  auto negative = config(2);
  negative.weights.beta = -1;
  EXPECT_THROW(train(negative), ConfigError);
}

TEST_F(TrainerTest, EvaluateScoresIdentity) {
  auto m = model::build_model<float>(model::preset("tiny"), 0);
  const auto restored = evaluate(m, samples_);
  const auto input = evaluate_identity(samples_);
  ASSERT_EQ(restored.images.size(), 3u);
  EXPECT_NEAR(restored.mean_psnr, input.mean_psnr, 1e-9);
  EXPECT_NEAR(restored.mean_psnr, restored.mean_input_psnr, 1e-9);
  std::vector<data::ImageSample> perfect = samples_;
  for (auto& s : perfect) s.degraded = s.clean;
  const auto r = evaluate(m, perfect);
  EXPECT_EQ(r.mean_psnr, 100.0);
  EXPECT_NEAR(r.mean_ssim, 1.0, 1e-12);
  EXPECT_TRUE(to_json(r).contains("images"));
}

TEST_F(TrainerTest, ConfigJsonIsStrict) {
  auto cfg = config(7);
  cfg.lr = 1e-3;
  const auto back = train_config_from_json(to_json(cfg));
  EXPECT_EQ(back.steps, 7);
  EXPECT_EQ(back.lr, 1e-3);
  EXPECT_EQ(back.model, cfg.model);
  auto j = to_json(cfg);
  j["stpes"] = 3;
  EXPECT_THROW(train_config_from_json(j), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"steps", "ten"}}), ConfigError);
}

}  // namespace
