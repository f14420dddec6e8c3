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
 * @file data_io_test.cpp
 * @brief Image codecs, synthetic degradations, patch sampling and manifests.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "common/errors.hpp"
#include "data/degrade.hpp"
#include "data/image_io.hpp"
#include "data/manifest.hpp"
#include "data/synth.hpp"
#include "training/metrics.hpp"
#include "test_support.hpp"

using namespace hogformer;
using namespace hogformer::data;
using hogformer::testing_support::max_abs_diff;
using hogformer::testing_support::random_tensor;
using hogformer::testing_support::TempDir;
using hogformer::testing_support::values;

namespace {

using Tf = Tensor<float>;

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f << bytes;
}

const DegradationKind kAllKinds[] = {DegradationKind::kIdentity, DegradationKind::kNoise, DegradationKind::kBlur,
                                     DegradationKind::kRain,     DegradationKind::kHaze,  DegradationKind::kLowlight,
                                     DegradationKind::kSnow};

class ImageIoTest : public ::testing::Test {
 protected:
  Rng rng_{401};
  TempDir dir_{"imgio"};
};

TEST_F(ImageIoTest, DecodesHandWrittenPpm) {
  const std::string bytes = std::string("P6\n2 1\n255\n") + std::string("\xff\x00\x00\x00\xff\x00", 6);
  const Tf t = decode_ppm(bytes);
  ASSERT_EQ(t.shape(), (Shape{3, 1, 2}));
  EXPECT_EQ(values(t), (std::vector<float>{1, 0, 0, 1, 0, 0}));
  write_bytes(dir_.file("two.ppm"), bytes);
  EXPECT_EQ(values(load_image(dir_.file("two.ppm"))), values(t));
}

TEST_F(ImageIoTest, PpmHeaderCommentsAreSkipped) {
  const std::string bytes = std::string("P6\n# made by hand\n1 1\n255\n") + std::string("\x80\x40\x00", 3);
  const Tf t = decode_ppm(bytes);
  EXPECT_FLOAT_EQ(t.at({0, 0, 0}), 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(t.at({1, 0, 0}), 64.0f / 255.0f);
}

TEST_F(ImageIoTest, BrokenFilesAreDecodeErrors) {
  write_bytes(dir_.file("empty.png"), "");
  EXPECT_THROW(load_image(dir_.file("empty.png")), DecodeError);
  EXPECT_THROW(decode_ppm(""), DecodeError);
  EXPECT_THROW(decode_ppm("P6\n2 1\n255\n\xff"), DecodeError);
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\n1 2 3"), DecodeError);
  EXPECT_THROW(decode_ppm("P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00"), DecodeError);
  write_bytes(dir_.file("junk.png"), "GIF89a........");
  EXPECT_THROW(load_image(dir_.file("junk.png")), DecodeError);

  const Tf img = random_tensor<float>({3, 8, 8}, rng_, 0, 1);
  save_image(img, dir_.file("ok.png"));
  std::ifstream f(dir_.file("ok.png"), std::ios::binary);
  std::string full((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  write_bytes(dir_.file("cut.png"), full.substr(0, full.size() / 2));
  EXPECT_THROW(load_image(dir_.file("cut.png")), DecodeError);
}

TEST_F(ImageIoTest, MissingFileIsIoError) {
  EXPECT_THROW(load_image(dir_.file("absent.png")), IoError);
}

TEST_F(ImageIoTest, SaveLoadIsWithinQuantizationBound) {
  for (const char* name : {"r.png", "r.ppm"}) {
    const Tf img = random_tensor<float>({3, 13, 17}, rng_, 0, 1);
    save_image(img, dir_.file(name));
    const Tf back = load_image(dir_.file(name));
    EXPECT_LE(max_abs_diff(back, img), 1.0 / 510.0 + 1e-7) << name;
    EXPECT_EQ(values(back), values(quantize(img))) << name;
  }
}

TEST_F(ImageIoTest, QuantizeRoundsHalfUpAndClamps) {
  Tf t = Tf::zeros({3, 1, 2});
  t.data_mut()[0] = 0.5f / 255.0f;
  t.data_mut()[1] = 1.5f;
  t.data_mut()[2] = -0.2f;
  const Tf q = quantize(t);
  EXPECT_FLOAT_EQ(q.data()[0], 1.0f / 255.0f);
  EXPECT_EQ(q.data()[1], 1.0f);
  EXPECT_EQ(q.data()[2], 0.0f);
}

TEST_F(ImageIoTest, GrayPngIsReplicated) {
  Tf gray = Tf::zeros({3, 2, 2});
  for (std::int64_t c = 0; c < 3; ++c) gray.data_mut()[c * 4 + 2] = 1.0f;
  save_image(gray, dir_.file("g.png"));
  const Tf back = load_image(dir_.file("g.png"));
  EXPECT_EQ(values(back), values(gray));
}

class DegradeTest : public ::testing::Test {
 protected:
  Tf clean_ = synth_clean(48, 40, 7);
};

TEST_F(DegradeTest, IdentityIsExact) {
  EXPECT_EQ(values(degrade(clean_, default_spec(DegradationKind::kIdentity, 3))), values(clean_));
}

TEST_F(DegradeTest, HazeEndpoints) {
  auto s = default_spec(DegradationKind::kHaze, 1);
  s.haze_t = 1.0;
  EXPECT_EQ(values(degrade(clean_, s)), values(clean_));
  s.haze_t = 0.0;
  s.haze_airlight = 0.8;
  for (float v : values(degrade(clean_, s))) EXPECT_FLOAT_EQ(v, 0.8f);
}

TEST_F(DegradeTest, HazeFollowsScatteringModelAtUniformDepth) {
  auto s = default_spec(DegradationKind::kHaze, 1);
  s.haze_t = 0.6;
  s.haze_airlight = 0.9;
  s.haze_depth_near = s.haze_depth_far = 1.0;
  const Tf out = degrade(clean_, s);
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    EXPECT_NEAR(out.data()[i], clean_.data()[i] * 0.6 + 0.9 * 0.4, 1e-6);
  }
}

TEST_F(DegradeTest, NoiseOnMidGrayGivesTwentyDecibels) {
  const Tf gray = Tf::full({3, 128, 128}, 0.5f);
  auto s = default_spec(DegradationKind::kNoise, 11);
  s.noise_sigma = 0.1;
  EXPECT_NEAR(training::psnr(degrade(gray, s), gray), 20.0, 0.5);
}

TEST_F(DegradeTest, LowlightIsPointwiseGainGamma) {
  auto s = default_spec(DegradationKind::kLowlight, 0);
  s.lowlight_gamma = 2.0;
  s.lowlight_gain = 0.5;
  const Tf out = degrade(clean_, s);
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const double x = clean_.data()[i];
    EXPECT_NEAR(out.data()[i], 0.5 * x * x, 1e-6);
  }
}

TEST_F(DegradeTest, BlurPreservesConstantsAndSmooths) {
  const Tf flat = Tf::full({3, 16, 16}, 0.3f);
  for (float v : values(gaussian_blur(flat, 2.0))) EXPECT_NEAR(v, 0.3f, 1e-6);
  const Tf blurred = degrade(clean_, default_spec(DegradationKind::kBlur, 0));
  double tv_in = 0, tv_out = 0;
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t y = 0; y < 48; ++y)
      for (std::int64_t x = 1; x < 40; ++x) {
        tv_in += std::abs(clean_.at({c, y, x}) - clean_.at({c, y, x - 1}));
        tv_out += std::abs(blurred.at({c, y, x}) - blurred.at({c, y, x - 1}));
      }
  EXPECT_LT(tv_out, tv_in);
}

TEST_F(DegradeTest, SnowAndRainBrighten) {
  double base = 0;
  for (float v : clean_.data()) base += v;
  for (auto kind : {DegradationKind::kSnow, DegradationKind::kRain}) {
    double sum = 0;
    for (float v : values(degrade(clean_, default_spec(kind, 5)))) sum += v;
    EXPECT_GT(sum, base) << kind_name(kind);
  }
}

TEST_F(DegradeTest, OutputsStayInUnitRangeAndAreDeterministic) {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const Tf img = random_tensor<float>({3, 24, 24}, rng, 0, 1);
    for (auto kind : kAllKinds) {
      const auto spec = default_spec(kind, 100 + trial);
      const Tf a = degrade(img, spec);
      const Tf b = degrade(img, spec);
      EXPECT_EQ(values(a), values(b)) << kind_name(kind);
      EXPECT_EQ(a.shape(), img.shape());
      for (float v : a.data()) {
        ASSERT_GE(v, 0.0f) << kind_name(kind);
        ASSERT_LE(v, 1.0f) << kind_name(kind);
      }
    }
  }
}

TEST_F(DegradeTest, SeedsChangeStochasticKinds) {
  for (auto kind : {DegradationKind::kNoise, DegradationKind::kRain, DegradationKind::kSnow}) {
    EXPECT_NE(values(degrade(clean_, default_spec(kind, 1))), values(degrade(clean_, default_spec(kind, 2))))
        << kind_name(kind);
  }
}

TEST_F(DegradeTest, ValidationListsBounds) {
  auto s = default_spec(DegradationKind::kHaze, 0);
  s.haze_t = 1.5;
  s.haze_airlight = -1;
  try {
    s.validate();
    FAIL() << "out-of-range spec accepted";
  } catch (const BoundsError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("t"), std::string::npos);
    EXPECT_NE(msg.find("airlight"), std::string::npos);
    EXPECT_NE(msg.find("[0, 1]"), std::string::npos);
  }
  EXPECT_THROW(degrade(clean_, s), BoundsError);
  auto n = default_spec(DegradationKind::kNoise, 0);
  n.noise_sigma = 2;
  EXPECT_THROW(n.validate(), BoundsError);
}

TEST_F(DegradeTest, SpecJsonRoundtripsAndRejectsForeignKeys) {
  for (auto kind : kAllKinds) {
    const auto s = default_spec(kind, 9);
    EXPECT_EQ(spec_from_json(to_json(s)), s) << kind_name(kind);
  }
  auto j = to_json(default_spec(DegradationKind::kNoise, 0));
  j["t"] = 0.5;
  EXPECT_THROW(spec_from_json(j), ConfigError);
  EXPECT_THROW(kind_from_name("fog"), ConfigError);
}

class PatchTest : public ::testing::Test {
 protected:
  // Channel 0 and 1 hold the row and column so a crop identifies its window.
  static Tf coordinate_image(std::int64_t h, std::int64_t w) {
    Tf t = Tf::zeros({3, h, w});
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        t.data_mut()[y * w + x] = static_cast<float>(y) / 64.0f;
        t.data_mut()[h * w + y * w + x] = static_cast<float>(x) / 64.0f;
      }
    return t;
  }
};

TEST_F(PatchTest, SameSeedGivesSameCrops) {
  const Tf clean = synth_clean(40, 40, 1);
  const Tf deg = degrade(clean, default_spec(DegradationKind::kNoise, 1));
  const auto a = sample_patches(clean, deg, 16, 3, 42, true);
  const auto b = sample_patches(clean, deg, 16, 3, 42, true);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(values(a[i].clean), values(b[i].clean));
    EXPECT_EQ(values(a[i].degraded), values(b[i].degraded));
    EXPECT_EQ(a[i].clean.shape(), (Shape{3, 16, 16}));
  }
}

TEST_F(PatchTest, CleanAndDegradedCropsAreAligned) {
  const Tf coords = coordinate_image(40, 36);
  for (auto kind : {DegradationKind::kIdentity, DegradationKind::kNoise, DegradationKind::kLowlight}) {
    const Tf deg = degrade(synth_clean(40, 36, 2), default_spec(kind, 3));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (const auto& p : sample_patches(coords, deg, 16, 2, seed, true)) {
        for (std::int64_t y = 0; y < 16; ++y)
          for (std::int64_t x = 0; x < 16; ++x) {
            const auto sy = static_cast<std::int64_t>(std::lround(p.clean.at({0, y, x}) * 64));
            const auto sx = static_cast<std::int64_t>(std::lround(p.clean.at({1, y, x}) * 64));
            for (std::int64_t c = 0; c < 3; ++c) {
              ASSERT_EQ(p.degraded.at({c, y, x}), deg.at({c, sy, sx})) << kind_name(kind);
            }
          }
      }
    }
  }
}

TEST_F(PatchTest, PointwiseKindsCommuteWithCropping) {
  const Tf clean = synth_clean(32, 32, 4);
  for (auto kind : {DegradationKind::kIdentity, DegradationKind::kLowlight}) {
    const auto spec = default_spec(kind, 0);
    const Tf whole = crop_image(degrade(clean, spec), 5, 7, 16, 16);
    const Tf local = degrade(crop_image(clean, 5, 7, 16, 16), spec);
    EXPECT_EQ(values(whole), values(local)) << kind_name(kind);
  }
}

TEST_F(PatchTest, FlipsPreserveShapeAndValues) {
  Rng rng(5);
  const Tf img = random_tensor<float>({3, 6, 9}, rng, 0, 1);
  for (bool h : {false, true})
    for (bool v : {false, true}) {
      const Tf f = flip_image(img, h, v);
      EXPECT_EQ(f.shape(), img.shape());
      auto a = values(f), b = values(img);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
      EXPECT_EQ(values(flip_image(f, h, v)), values(img));
    }
  EXPECT_EQ(flip_image(img, true, false).at({1, 2, 0}), img.at({1, 2, 8}));
  EXPECT_EQ(flip_image(img, false, true).at({1, 0, 3}), img.at({1, 5, 3}));
}

TEST_F(PatchTest, TooSmallImageIsRejected) {
  const Tf img = synth_clean(12, 40, 0);
  EXPECT_THROW(sample_patches(img, img, 16, 1, 0, false), InputError);
  EXPECT_THROW(sample_patches(img, synth_clean(12, 41, 0), 8, 1, 0, false), InputError);
}

TEST_F(PatchTest, SynthImagesAreDeterministicAndInRange) {
  EXPECT_EQ(values(synth_clean(20, 30, 9)), values(synth_clean(20, 30, 9)));
  EXPECT_NE(values(synth_clean(20, 30, 9)), values(synth_clean(20, 30, 10)));
  for (float v : values(synth_clean(20, 30, 9))) {
    EXPECT_GE(v, 0.02f - 1e-6f);
    EXPECT_LE(v, 0.98f + 1e-6f);
  }
}

class ManifestTest : public ::testing::Test {
 protected:
  TempDir dir_{"manifest"};
};

TEST_F(ManifestTest, EmptyDirectoryGivesEmptyManifest) {
  const auto m = build_manifest(dir_.path());
  EXPECT_TRUE(m.entries.empty());
  EXPECT_NO_THROW(validate_paths(m));
}

TEST_F(ManifestTest, ImagesWithoutSpecListGetIdentity) {
  save_image(synth_clean(16, 16, 0), dir_.file("b.png"));
  save_image(synth_clean(16, 16, 1), dir_.file("a.ppm"));
  write_bytes(dir_.file("notes.txt"), "not an image");
  const auto m = build_manifest(dir_.path());
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_NE(m.entries[0].clean_path.find("a.ppm"), std::string::npos);
  EXPECT_EQ(m.entries[0].spec.kind, DegradationKind::kIdentity);
  const auto s = load_sample(m, 1);
  EXPECT_EQ(values(s.clean), values(s.degraded));
}

TEST_F(ManifestTest, WriteReadRoundtrip) {
  CorpusOptions o;
  o.images = 3;
  o.height = o.width = 16;
  const auto m = make_corpus(dir_.path(), o);
  write_manifest(m, dir_.file("copy.json"));
  const auto back = read_manifest(dir_.file("copy.json"));
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(manifest_from_json(to_json(m), m.base_dir).entries, m.entries);
  const auto a = load_sample(m, 4);
  const auto b = load_sample(back, 4);
  EXPECT_EQ(values(a.degraded), values(b.degraded));
}

TEST_F(ManifestTest, WritingElsewhereRebasesRelativePaths) {
  CorpusOptions o;
  o.images = 1;
  o.height = o.width = 16;
  const auto m = make_corpus(dir_.file("corpus"), o);
  std::filesystem::create_directories(dir_.file("elsewhere/deeper"));
  write_manifest(m, dir_.file("elsewhere/deeper/m.json"));
  const auto back = read_manifest(dir_.file("elsewhere/deeper/m.json"));
  ASSERT_EQ(back.entries.size(), m.entries.size());
  EXPECT_EQ(back.entries[0].clean_path.rfind("../../corpus/", 0), 0u) << back.entries[0].clean_path;
  EXPECT_EQ(values(load_sample(back, 2).degraded), values(load_sample(m, 2).degraded));
}

TEST_F(ManifestTest, FixtureCorpusHasOneHundredTwentySamples) {
  CorpusOptions o;
  o.height = o.width = 16;
  const auto m = make_corpus(dir_.path(), o);
  EXPECT_EQ(m.entries.size(), 120u);
  EXPECT_EQ(read_manifest(dir_.file(kManifestFile)).entries.size(), 120u);
  EXPECT_EQ(build_manifest(dir_.path()).entries, m.entries);
  std::set<std::string> ids;
  for (const auto& e : m.entries) ids.insert(e.id);
  EXPECT_EQ(ids.size(), 120u);
}

TEST_F(ManifestTest, DanglingPathIsRejected) {
  Manifest m;
  m.base_dir = dir_.path();
  m.entries.push_back({"ghost", "ghost.png", default_spec(DegradationKind::kNoise, 0)});
  write_manifest(m, dir_.file("m.json"));
  try {
    read_manifest(dir_.file("m.json"));
    FAIL() << "dangling path accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost.png"), std::string::npos);
  }
}

TEST_F(ManifestTest, SchemaProblemsAreConfigErrors) {
  EXPECT_THROW(manifest_from_json(nlohmann::json::object(), "."), ConfigError);
  EXPECT_THROW(manifest_from_json(nlohmann::json{{"entries", {{{"id", "x"}}}}}, "."), ConfigError);
  write_bytes(dir_.file("bad.json"), "{ not json");
  EXPECT_THROW(read_manifest(dir_.file("bad.json")), ConfigError);
}

}  // namespace
