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
 * @file capi_test.cpp
 * @brief The C interface: status mapping, model lifecycle, restoration and
 *        the file-level entry points.
 */

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hogformer/hogformer.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  hogf_string_free(s);
  return out;
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("hogf_capi_" + std::to_string(rd()));
    fs::create_directories(dir_);
    hogf_set_log_level(3);
  }
  void TearDown() override {
    hogf_set_log_callback(nullptr, nullptr);
    hogf_set_log_level(1);
    fs::remove_all(dir_);
  }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  std::string corpus(int images, int size) {
    const std::string options =
        json{{"images", images}, {"height", size}, {"width", size}, {"seed", 0}}.dump();
    char* manifest = nullptr;
    EXPECT_EQ(hogf_make_corpus(file("corpus").c_str(), options.c_str(), &manifest), HOGF_OK) << hogf_last_error();
    take(manifest);
    return file("corpus/manifest.json");
  }

  fs::path dir_;
};

TEST_F(CApiTest, StatusNamesAndVersion) {
  EXPECT_STREQ(hogf_status_name(HOGF_OK), "ok");
  EXPECT_STREQ(hogf_status_name(HOGF_ERR_CHECKPOINT), "checkpoint_error");
  EXPECT_STREQ(hogf_status_name(static_cast<hogf_status>(42)), "unknown_status");
  EXPECT_GT(std::string(hogf_version()).size(), 0u);
}

TEST_F(CApiTest, NullArgumentsAreUsageErrors) {
  EXPECT_EQ(hogf_model_create("{}", 0, nullptr), HOGF_ERR_USAGE);
  EXPECT_FALSE(std::string(hogf_last_error()).empty());
  EXPECT_EQ(hogf_restore(nullptr, nullptr, 16, 16, nullptr), HOGF_ERR_USAGE);
  EXPECT_EQ(hogf_model_load(nullptr, nullptr), HOGF_ERR_USAGE);
  hogf_model_free(nullptr);
}

TEST_F(CApiTest, ErrorsMapToStatuses) {
  hogf_model* m = nullptr;
  EXPECT_EQ(hogf_model_create("{not json", 0, &m), HOGF_ERR_DECODE);
  EXPECT_EQ(hogf_model_create(R"({"preset": "huge"})", 0, &m), HOGF_ERR_CONFIG);
  EXPECT_EQ(hogf_model_create(R"({"preset": "tiny", "n_bin": 1})", 0, &m), HOGF_ERR_CONFIG);
  EXPECT_EQ(m, nullptr);
  EXPECT_EQ(hogf_model_load(file("absent.hogf").c_str(), &m), HOGF_ERR_CHECKPOINT);
  EXPECT_EQ(hogf_degrade_file(file("absent.png").c_str(), R"({"kind": "noise"})", 0, file("o.png").c_str()),
            HOGF_ERR_IO);
  EXPECT_EQ(hogf_degrade_file(file("absent.png").c_str(), R"({"kind": "noise", "sigma": 3})", 0,
                              file("o.png").c_str()),
            HOGF_ERR_BOUNDS);
}

TEST_F(CApiTest, PresetsAndParamCounts) {
  char* presets = nullptr;
  ASSERT_EQ(hogf_presets(&presets), HOGF_OK);
  const auto names = json::parse(take(presets));
  EXPECT_EQ(names, json({"tiny", "small", "large"}));

  std::int64_t closed = 0, built = 0;
  ASSERT_EQ(hogf_param_count(R"({"preset": "tiny"})", &closed, &built), HOGF_OK) << hogf_last_error();
  EXPECT_EQ(closed, 567744);
  EXPECT_EQ(built, 567744);

  char* resolved = nullptr;
  ASSERT_EQ(hogf_resolve_config(R"({"preset": "tiny", "dhogsa": false})", &resolved), HOGF_OK);
  const auto cfg = json::parse(take(resolved));
  EXPECT_EQ(cfg.at("dhogsa"), false);
  EXPECT_EQ(cfg.at("n_bin"), 9);
}

TEST_F(CApiTest, FreshModelRestoresToInput) {
  hogf_model* m = nullptr;
  ASSERT_EQ(hogf_model_create(R"({"preset": "tiny"})", 7, &m), HOGF_OK) << hogf_last_error();
  std::int64_t count = 0;
  ASSERT_EQ(hogf_model_param_count(m, &count), HOGF_OK);
  EXPECT_EQ(count, 567744);

  const std::int64_t h = 21, w = 18;
  std::vector<float> in(3 * h * w), out(in.size(), -1.0f);
  std::mt19937 gen(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : in) v = u(gen);
  ASSERT_EQ(hogf_restore(m, in.data(), h, w, out.data()), HOGF_OK) << hogf_last_error();
  EXPECT_EQ(out, in);
  EXPECT_EQ(hogf_restore(m, in.data(), 0, w, out.data()), HOGF_ERR_INPUT);
  hogf_model_free(m);
}

TEST_F(CApiTest, SaveLoadPreservesConfigAndWeights) {
  hogf_model* m = nullptr;
  ASSERT_EQ(hogf_model_create(R"({"preset": "tiny", "diff": false})", 1, &m), HOGF_OK);
  ASSERT_EQ(hogf_model_save(m, file("m.hogf").c_str()), HOGF_OK) << hogf_last_error();
  hogf_model* back = nullptr;
  ASSERT_EQ(hogf_model_load(file("m.hogf").c_str(), &back), HOGF_OK) << hogf_last_error();
  char* a = nullptr;
  char* b = nullptr;
  ASSERT_EQ(hogf_model_config(m, &a), HOGF_OK);
  ASSERT_EQ(hogf_model_config(back, &b), HOGF_OK);
  const std::string ca = take(a);
  EXPECT_EQ(ca, take(b));
  EXPECT_EQ(json::parse(ca).at("diff"), false);
  ASSERT_EQ(hogf_model_save(back, file("again.hogf").c_str()), HOGF_OK);
  EXPECT_EQ(fs::file_size(file("m.hogf")), fs::file_size(file("again.hogf")));
  hogf_model_free(m);
  hogf_model_free(back);
}

TEST_F(CApiTest, LogCallbackReceivesFormattedLines) {
  std::vector<std::string> lines;
  hogf_set_log_callback([](const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); },
                        &lines);
  hogf_set_log_level(0);
  hogf_log(2, "disk nearly full");
  hogf_log(0, "detail");
  hogf_set_log_level(2);
  hogf_log(1, "suppressed");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NE(lines[0].find("WARN disk nearly full"), std::string::npos);
  EXPECT_EQ(lines[0][4], '-');
  EXPECT_NE(lines[1].find("DEBUG detail"), std::string::npos);
}

TEST_F(CApiTest, CorpusManifestAndEvaluation) {
  const std::string manifest = corpus(2, 16);
  char* built = nullptr;
  ASSERT_EQ(hogf_build_manifest(file("corpus").c_str(), file("rebuilt.json").c_str(), &built), HOGF_OK)
      << hogf_last_error();
  EXPECT_EQ(json::parse(take(built)).at("entries").size(), 12u);
  EXPECT_TRUE(fs::exists(file("rebuilt.json")));

  hogf_model* m = nullptr;
  ASSERT_EQ(hogf_model_create(R"({"preset": "tiny"})", 0, &m), HOGF_OK);
  char* report = nullptr;
  ASSERT_EQ(hogf_eval(m, manifest.c_str(), &report), HOGF_OK) << hogf_last_error();
  const auto r = json::parse(take(report));
  EXPECT_EQ(r.at("images").size(), 12u);
  EXPECT_NEAR(r.at("mean").at("psnr").get<double>(), r.at("input_mean").at("psnr").get<double>(), 1e-9);
  hogf_model_free(m);
}

TEST_F(CApiTest, DegradeFileWritesImage) {
  corpus(1, 16);
  std::string clean;
  for (const auto& e : fs::directory_iterator(file("corpus")))
    if (e.path().extension() == ".png") clean = e.path().string();
  ASSERT_FALSE(clean.empty());
  ASSERT_EQ(hogf_degrade_file(clean.c_str(), R"({"kind": "rain", "angle": 45})", 5, file("rain.png").c_str()),
            HOGF_OK)
      << hogf_last_error();
  EXPECT_GT(fs::file_size(file("rain.png")), 0u);
  ASSERT_EQ(hogf_degrade_file(clean.c_str(), R"({"kind": "identity"})", 5, file("same.ppm").c_str()), HOGF_OK);
  hogf_model* m = nullptr;
  ASSERT_EQ(hogf_model_create(R"({"preset": "tiny"})", 0, &m), HOGF_OK);
  ASSERT_EQ(hogf_restore_file(m, file("same.ppm").c_str(), file("restored.png").c_str()), HOGF_OK);
  EXPECT_TRUE(fs::exists(file("restored.png")));
  hogf_model_free(m);
}

TEST_F(CApiTest, TrainReportsStepsAndWritesCheckpoint) {
  const std::string manifest = corpus(1, 32);
  const json cfg = {{"model", {{"preset", "tiny"}}}, {"manifest", manifest}, {"crop", 32},
                    {"batch", 1},   {"steps", 2},     {"checkpoint_out", file("t.hogf")},
                    {"log_csv", file("t.csv")}};
  std::vector<std::int64_t> seen;
  char* summary = nullptr;
  ASSERT_EQ(hogf_train(
                cfg.dump().c_str(),
                [](const hogf_step* s, void* user) { static_cast<std::vector<std::int64_t>*>(user)->push_back(s->step); },
                &seen, &summary),
            HOGF_OK)
      << hogf_last_error();
  EXPECT_EQ(seen, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(json::parse(take(summary)).at("final_step"), 2);
  hogf_model* m = nullptr;
  EXPECT_EQ(hogf_model_load(file("t.hogf").c_str(), &m), HOGF_OK);
  hogf_model_free(m);

  json bad = cfg;
  bad["steps"] = -1;
  EXPECT_EQ(hogf_train(bad.dump().c_str(), nullptr, nullptr, nullptr), HOGF_ERR_CONFIG);
}

TEST_F(CApiTest, HogProfileWritesReports) {
  const std::string options =
      json{{"images", 4}, {"height", 32}, {"width", 32}, {"seed", 1}}.dump();
  char* manifest = nullptr;
  ASSERT_EQ(hogf_make_corpus(file("corpus").c_str(), options.c_str(), &manifest), HOGF_OK);
  take(manifest);
  char* report = nullptr;
  ASSERT_EQ(hogf_hog_profile(file("corpus/manifest.json").c_str(), file("profile").c_str(), &report), HOGF_OK)
      << hogf_last_error();
  take(report);
  for (const char* name : {"signatures.csv", "distances.csv", "profile.json"}) {
    EXPECT_TRUE(fs::exists(file(std::string("profile/") + name))) << name;
  }
}

}  // namespace
