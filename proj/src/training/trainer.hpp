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
#include <vector>

#include <json.hpp>

#include "data/manifest.hpp"
#include "model/model.hpp"
#include "training/losses.hpp"

namespace hogformer::training {

struct TrainConfig {
  model::ModelConfig model;
  // Either a manifest path or in-memory samples; samples win when both are set.
  std::string manifest;
  std::vector<data::ImageSample> samples;
  std::int64_t crop = 64;
  int batch = 2;
  std::int64_t steps = 1000;
  double lr = 3e-4;
  double lr_min = 0.0;
  std::uint64_t seed = 0;
  bool flips = true;
  LossWeights weights;        // beta is forced to 0 when model.hog_loss is off
  std::int64_t eval_every = 0;  // 0 disables periodic evaluation
  int eval_images = 4;
  std::string log_csv;          // empty: no CSV
  std::string checkpoint_out;   // empty: no checkpoint
  std::int64_t checkpoint_every = 0;
  std::string resume;           // checkpoint to continue from
};

nlohmann::json to_json(const TrainConfig& cfg);
// Inverse of to_json for the file-backed fields; "model" is a model config
// object (it may name a preset). Unknown keys and ill-typed values throw
// ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct StepRecord {
  std::int64_t step = 0;  // 1-based index of the update
  double rec = 0.0;
  double cor = 0.0;
  double hog = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

inline constexpr const char* kLossCsvHeader = "step,l_rec,l_cor,l_hog,total,lr";
std::string csv_row(const StepRecord& r);

struct ImageMetrics {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double input_psnr = 0.0;  // degraded vs clean
  double input_ssim = 0.0;
};

struct MetricReport {
  std::vector<ImageMetrics> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_input_psnr = 0.0;
  double mean_input_ssim = 0.0;
};

nlohmann::json to_json(const MetricReport& r);

// Restores every degraded sample (clamped output) and scores it against the
// clean image.
MetricReport evaluate(const model::Model<float>& m, const std::vector<data::ImageSample>& samples);

// Scores degraded images directly against clean ones (no model).
MetricReport evaluate_identity(const std::vector<data::ImageSample>& samples);

struct TrainResult {
  model::Model<float> model;
  std::vector<StepRecord> log;
  std::int64_t final_step = 0;
};

using StepCallback = std::function<void(const StepRecord&)>;

// All data is loaded and validated before the first step, so unreadable
// inputs abort with nothing written. steps == 0 writes the initialized
// checkpoint and a header-only CSV.
TrainResult train(const TrainConfig& cfg, const StepCallback& on_step = {});

// Loads every manifest sample; throws if any is unreadable.
std::vector<data::ImageSample> load_all(const data::Manifest& m);

}  // namespace hogformer::training
