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
#include "training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "common/errors.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "data/synth.hpp"
#include "model/checkpoint.hpp"
#include "tensor/ops.hpp"
#include "training/adam.hpp"
#include "training/metrics.hpp"

namespace hogformer::training {

namespace {

Tensor<float> stack(const std::vector<Tensor<float>>& images) {
  const Shape s = images.front().shape();
  std::vector<float> out;
  out.reserve(images.size() * static_cast<std::size_t>(numel(s)));
  for (const auto& im : images) out.insert(out.end(), im.data().begin(), im.data().end());
  return Tensor<float>::from_data({static_cast<std::int64_t>(images.size()), s[0], s[1], s[2]}, std::move(out));
}

std::vector<Adam::Slot> slots(model::Model<float>& m) {
  std::vector<Adam::Slot> out;
  m.visit([&](const std::string& name, Tensor<float>& p) { out.push_back({name, p}); });
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void check_samples(const std::vector<data::ImageSample>& samples, std::int64_t crop) {
  if (samples.empty()) throw InputError("train: no training samples");
  for (const auto& s : samples) {
    if (s.clean.dim(1) < crop || s.clean.dim(2) < crop) {
      throw InputError("train: sample '" + s.id + "' is " + std::to_string(s.clean.dim(1)) + "x" +
                       std::to_string(s.clean.dim(2)) + ", smaller than the crop " + std::to_string(crop));
    }
  }
}

}  // namespace

nlohmann::json to_json(const TrainConfig& c) {
  return {{"model", model::to_json(c.model)},
          {"manifest", c.manifest},
          {"in_memory_samples", c.samples.size()},
          {"crop", c.crop},
          {"batch", c.batch},
          {"steps", c.steps},
          {"lr", c.lr},
          {"lr_min", c.lr_min},
          {"seed", c.seed},
          {"flips", c.flips},
          {"alpha", c.weights.alpha},
          {"beta", c.weights.beta},
          {"eval_every", c.eval_every},
          {"eval_images", c.eval_images},
          {"log_csv", c.log_csv},
          {"checkpoint_out", c.checkpoint_out},
          {"checkpoint_every", c.checkpoint_every},
          {"resume", c.resume}};
}

namespace {

template <typename V>
void read(const nlohmann::json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("train config key '") + key + "' has the wrong type: " + j.at(key).dump());
  }
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known = {"model",      "manifest",        "in_memory_samples", "crop",
                                              "batch",      "steps",           "lr",                "lr_min",
                                              "seed",       "flips",           "alpha",             "beta",
                                              "eval_every", "eval_images",     "log_csv",           "checkpoint_out",
                                              "checkpoint_every", "resume"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown train config key '" + k + "'");
  }
  TrainConfig c;
  if (j.contains("model")) c.model = model::config_from_json(j.at("model"));
  read(j, "manifest", c.manifest);
  read(j, "crop", c.crop);
  read(j, "batch", c.batch);
  read(j, "steps", c.steps);
  read(j, "lr", c.lr);
  read(j, "lr_min", c.lr_min);
  read(j, "seed", c.seed);
  read(j, "flips", c.flips);
  read(j, "alpha", c.weights.alpha);
  read(j, "beta", c.weights.beta);
  read(j, "eval_every", c.eval_every);
  read(j, "eval_images", c.eval_images);
  read(j, "log_csv", c.log_csv);
  read(j, "checkpoint_out", c.checkpoint_out);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "resume", c.resume);
  return c;
}

std::string csv_row(const StepRecord& r) {
  return std::to_string(r.step) + "," + fmt(r.rec) + "," + fmt(r.cor) + "," + fmt(r.hog) + "," + fmt(r.total) + "," +
         fmt(r.lr);
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& im : r.images) {
    images.push_back({{"id", im.id},
                      {"psnr", im.psnr},
                      {"ssim", im.ssim},
                      {"input_psnr", im.input_psnr},
                      {"input_ssim", im.input_ssim}});
  }
  return {{"images", images},
          {"mean", {{"psnr", r.mean_psnr}, {"ssim", r.mean_ssim}}},
          {"input_mean", {{"psnr", r.mean_input_psnr}, {"ssim", r.mean_input_ssim}}},
          {"count", r.images.size()}};
}

namespace {

MetricReport score(const std::vector<data::ImageSample>& samples,
                   const std::function<Tensor<float>(const Tensor<float>&)>& restore) {
  MetricReport r;
  for (const auto& s : samples) {
    ImageMetrics im;
    im.id = s.id;
    const auto out = restore(s.degraded);
    im.psnr = psnr(out, s.clean);
    im.ssim = ssim(out, s.clean);
    im.input_psnr = psnr(s.degraded, s.clean);
    im.input_ssim = ssim(s.degraded, s.clean);
    r.mean_psnr += im.psnr;
    r.mean_ssim += im.ssim;
    r.mean_input_psnr += im.input_psnr;
    r.mean_input_ssim += im.input_ssim;
    r.images.push_back(std::move(im));
  }
  if (!r.images.empty()) {
    const double n = static_cast<double>(r.images.size());
    r.mean_psnr /= n;
    r.mean_ssim /= n;
    r.mean_input_psnr /= n;
    r.mean_input_ssim /= n;
  }
  return r;
}

}  // namespace

MetricReport evaluate(const model::Model<float>& m, const std::vector<data::ImageSample>& samples) {
  return score(samples, [&](const Tensor<float>& x) { return model::restore_image(m, x); });
}

MetricReport evaluate_identity(const std::vector<data::ImageSample>& samples) {
  return score(samples, [](const Tensor<float>& x) { return x; });
}

std::vector<data::ImageSample> load_all(const data::Manifest& m) {
  std::vector<data::ImageSample> out;
  out.reserve(m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) out.push_back(data::load_sample(m, i));
  return out;
}

TrainResult train(const TrainConfig& cfg, const StepCallback& on_step) {
  cfg.model.validate();
  if (cfg.steps < 0) throw ConfigError("train: steps must be >= 0");
  if (cfg.batch < 1) throw ConfigError("train: batch must be >= 1");
  if (cfg.crop < 16) throw ConfigError("train: crop must be >= 16");
  if (!(cfg.lr > 0) || cfg.lr_min < 0 || cfg.lr_min > cfg.lr) throw ConfigError("train: need 0 <= lr_min <= lr, lr > 0");
  LossWeights weights = cfg.weights;
  if (weights.alpha < 0 || weights.beta < 0) throw ConfigError("train: loss weights must be >= 0");
  if (!cfg.model.hog_loss) weights.beta = 0.0;

  std::vector<data::ImageSample> samples = cfg.samples;
  if (samples.empty()) {
    if (cfg.manifest.empty()) throw ConfigError("train: no manifest and no in-memory samples");
    samples = load_all(data::read_manifest(cfg.manifest));
  }
  check_samples(samples, cfg.crop);

  TrainResult result;
  std::int64_t start = 0;
  std::optional<model::OptimizerState> opt_state;
  if (!cfg.resume.empty()) {
    auto loaded = model::load_checkpoint(cfg.resume, &cfg.model);
    result.model = std::move(loaded.model);
    start = loaded.extras.step;
    opt_state = std::move(loaded.extras.optimizer);
    if (start > cfg.steps) {
      throw ConfigError("train: checkpoint is at step " + std::to_string(start) + ", beyond steps " +
                        std::to_string(cfg.steps));
    }
    log::info("resuming from " + cfg.resume + " at step " + std::to_string(start));
  } else {
    result.model = model::build_model<float>(cfg.model, cfg.seed);
  }

  Adam adam(slots(result.model));
  if (opt_state) adam.load_state(*opt_state);

  std::ofstream csv;
  if (!cfg.log_csv.empty()) {
    const bool append = start > 0 && std::filesystem::exists(cfg.log_csv);
    csv.open(cfg.log_csv, append ? std::ios::app : std::ios::trunc);
    if (!csv) throw IoError("train: cannot open loss log " + cfg.log_csv);
    if (!append) csv << kLossCsvHeader << "\n" << std::flush;
  }

  auto save = [&](std::int64_t step) {
    if (cfg.checkpoint_out.empty()) return;
    model::save_checkpoint(result.model, cfg.checkpoint_out, {step, adam.state()});
  };

  const std::vector<data::ImageSample> eval_set(
      samples.begin(), samples.begin() + std::min<std::size_t>(samples.size(), static_cast<std::size_t>(cfg.eval_images)));

  for (std::int64_t step = start; step < cfg.steps; ++step) {
    // Per-step generator so a resumed run draws the same batches.
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
    std::vector<Tensor<float>> clean, degraded;
    for (int b = 0; b < cfg.batch; ++b) {
      const auto& s = samples[rng.below(samples.size())];
      auto p = data::sample_patches(s.clean, s.degraded, cfg.crop, 1, rng.next_u64(), cfg.flips).front();
      clean.push_back(p.clean);
      degraded.push_back(p.degraded);
    }
    const auto x = stack(degraded), gt = stack(clean);

    const double lr = cosine_lr(cfg.lr, cfg.lr_min, step, cfg.steps);
    adam.zero_grad();
    const auto pred = model::forward(result.model, x);
    const auto terms = total_loss(pred, gt, weights);
    terms.total.backward();
    StepRecord rec{step + 1, terms.rec.item(), terms.cor.item(), terms.hog.item(), terms.total.item(), lr};
    if (!std::isfinite(rec.total)) {
      throw NumericError("train: non-finite loss at step " + std::to_string(rec.step));
    }
    adam.step(lr);

    result.log.push_back(rec);
    if (csv.is_open()) csv << csv_row(rec) << "\n" << std::flush;
    if (on_step) on_step(rec);

    if (cfg.eval_every > 0 && rec.step % cfg.eval_every == 0) {
      const auto r = evaluate(result.model, eval_set);
      log::info("eval step " + std::to_string(rec.step) + " psnr " + fmt(r.mean_psnr) + " ssim " +
                fmt(r.mean_ssim) + " (input psnr " + fmt(r.mean_input_psnr) + ")");
    }
    if (cfg.checkpoint_every > 0 && rec.step % cfg.checkpoint_every == 0 && rec.step < cfg.steps) save(rec.step);
  }

  result.final_step = std::max(start, cfg.steps);
  save(result.final_step);
  return result;
}

}  // namespace hogformer::training
