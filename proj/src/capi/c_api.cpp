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
#include "hogformer/hogformer.h"

#include <cstring>
#include <filesystem>
#include <functional>
#include <new>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"
#include "common/log.hpp"
#include "data/degrade.hpp"
#include "data/image_io.hpp"
#include "data/manifest.hpp"
#include "diagnostics/grad_suite.hpp"
#include "diagnostics/hog_profile.hpp"
#include "model/checkpoint.hpp"
#include "model/config.hpp"
#include "model/model.hpp"
#include "training/trainer.hpp"

struct hogf_model {
  hogformer::model::Model<float> model;
};

namespace {

using namespace hogformer;
using nlohmann::json;

thread_local std::string g_last_error;

hogf_status fail(hogf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

hogf_status guard(const std::function<void()>& body) {
  try {
    g_last_error.clear();
    body();
    return HOGF_OK;
  } catch (const ConfigError& e) {
    return fail(HOGF_ERR_CONFIG, e.what());
  } catch (const InputError& e) {
    return fail(HOGF_ERR_INPUT, e.what());
  } catch (const BoundsError& e) {
    return fail(HOGF_ERR_BOUNDS, e.what());
  } catch (const UsageError& e) {
    return fail(HOGF_ERR_USAGE, e.what());
  } catch (const DecodeError& e) {
    return fail(HOGF_ERR_DECODE, e.what());
  } catch (const CheckpointError& e) {
    return fail(HOGF_ERR_CHECKPOINT, e.what());
  } catch (const NumericError& e) {
    return fail(HOGF_ERR_NUMERIC, e.what());
  } catch (const IoError& e) {
    return fail(HOGF_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(HOGF_ERR_IO, e.what());
  } catch (const json::parse_error& e) {
    return fail(HOGF_ERR_DECODE, std::string("invalid JSON: ") + e.what());
  } catch (const json::exception& e) {
    return fail(HOGF_ERR_CONFIG, std::string("JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(HOGF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HOGF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HOGF_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw UsageError(std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const json& j) {
  if (out) *out = dup(j.dump(2));
}

json parse(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

model::ModelConfig config_of(const char* config_json) {
  auto cfg = model::config_from_json(parse(config_json, "model config"));
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* hogf_version(void) { return "0.1.0"; }

const char* hogf_status_name(hogf_status status) {
  switch (status) {
    case HOGF_OK: return "ok";
    case HOGF_ERR_CONFIG: return "config_error";
    case HOGF_ERR_INPUT: return "input_error";
    case HOGF_ERR_BOUNDS: return "bounds_error";
    case HOGF_ERR_USAGE: return "usage_error";
    case HOGF_ERR_DECODE: return "decode_error";
    case HOGF_ERR_CHECKPOINT: return "checkpoint_error";
    case HOGF_ERR_NUMERIC: return "numeric_error";
    case HOGF_ERR_IO: return "io_error";
    case HOGF_ERR_INTERNAL: return "internal_error";
  }
  return "unknown_status";
}

const char* hogf_last_error(void) { return g_last_error.c_str(); }

void hogf_string_free(char* s) { std::free(s); }

void hogf_set_log_callback(hogf_log_fn fn, void* user) {
  log::set_sink(fn, user);
}

void hogf_set_log_level(int level) {
  if (level < 0) level = 0;
  if (level > 3) level = 3;
  log::set_level(static_cast<log::Level>(level));
}

void hogf_log(int level, const char* message) {
  if (level < 0) level = 0;
  if (level > 3) level = 3;
  log::write(static_cast<log::Level>(level), message ? message : "");
}

hogf_status hogf_presets(char** json_out) {
  return guard([&] {
    require(json_out, "json_out");
    emit(json_out, model::preset_names());
  });
}

hogf_status hogf_resolve_config(const char* config_json, char** json_out) {
  return guard([&] {
    require(json_out, "json_out");
    emit(json_out, model::to_json(config_of(config_json)));
  });
}

hogf_status hogf_param_count(const char* config_json, int64_t* closed_form, int64_t* constructed) {
  return guard([&] {
    const auto cfg = config_of(config_json);
    if (closed_form) *closed_form = model::closed_form_param_count(cfg);
    if (constructed) {
      auto m = model::build_model<float>(cfg, 0);
      *constructed = m.param_count();
    }
  });
}

hogf_status hogf_model_create(const char* config_json, uint64_t seed, hogf_model** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    *out = new hogf_model{model::build_model<float>(config_of(config_json), seed)};
  });
}

hogf_status hogf_model_load(const char* path, hogf_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new hogf_model{model::load_checkpoint(path).model};
  });
}

hogf_status hogf_model_save(const hogf_model* m, const char* path) {
  return guard([&] {
    require(m, "model");
    require(path, "path");
    model::save_checkpoint(const_cast<hogf_model*>(m)->model, path);
  });
}

void hogf_model_free(hogf_model* m) { delete m; }

hogf_status hogf_model_config(const hogf_model* m, char** json_out) {
  return guard([&] {
    require(m, "model");
    require(json_out, "json_out");
    emit(json_out, model::to_json(m->model.config));
  });
}

hogf_status hogf_model_param_count(const hogf_model* m, int64_t* count) {
  return guard([&] {
    require(m, "model");
    require(count, "count");
    *count = const_cast<hogf_model*>(m)->model.param_count();
  });
}

hogf_status hogf_restore(const hogf_model* m, const float* chw, int64_t height, int64_t width, float* out) {
  return guard([&] {
    require(m, "model");
    require(chw, "chw");
    require(out, "out");
    if (height < 1 || width < 1) throw InputError("restore: extents must be positive");
    const auto n = static_cast<std::size_t>(3 * height * width);
    auto x = Tensor<float>::from_data({3, height, width}, std::vector<float>(chw, chw + n));
    const auto y = model::restore_image(m->model, x);
    std::copy(y.data().begin(), y.data().end(), out);
  });
}

hogf_status hogf_restore_file(const hogf_model* m, const char* in_path, const char* out_path) {
  return guard([&] {
    require(m, "model");
    require(in_path, "in_path");
    require(out_path, "out_path");
    data::save_image(model::restore_image(m->model, data::load_image(in_path)), out_path);
  });
}

hogf_status hogf_train(const char* train_json, hogf_step_fn on_step, void* user, char** summary_json) {
  return guard([&] {
    const auto cfg = training::train_config_from_json(parse(train_json, "train config"));
    log::info("train config " + training::to_json(cfg).dump());
    training::StepCallback cb;
    if (on_step) {
      cb = [&](const training::StepRecord& r) {
        const hogf_step s{r.step, r.rec, r.cor, r.hog, r.total, r.lr};
        on_step(&s, user);
      };
    }
    const auto result = training::train(cfg, cb);
    json summary = {{"final_step", result.final_step}, {"steps_run", result.log.size()}};
    if (!result.log.empty()) {
      const auto& r = result.log.back();
      summary["last"] = {{"step", r.step}, {"l_rec", r.rec}, {"l_cor", r.cor},
                         {"l_hog", r.hog},   {"total", r.total}, {"lr", r.lr}};
    }
    emit(summary_json, summary);
  });
}

hogf_status hogf_eval(const hogf_model* m, const char* manifest_path, char** report_json) {
  return guard([&] {
    require(m, "model");
    require(manifest_path, "manifest_path");
    const auto samples = training::load_all(data::read_manifest(manifest_path));
    emit(report_json, training::to_json(training::evaluate(m->model, samples)));
  });
}

hogf_status hogf_grad_check(const char* module, uint64_t seed, char** report_json, int* all_passed) {
  return guard([&] {
    diagnostics::GradSuiteOptions o;
    if (module && *module) o.module = module;
    o.seed = seed;
    const auto results = diagnostics::run_grad_suite(o);
    const auto j = diagnostics::to_json(results);
    if (all_passed) *all_passed = j.at("passed").get<bool>() ? 1 : 0;
    emit(report_json, j);
  });
}

hogf_status hogf_hog_profile(const char* manifest_path, const char* out_dir, char** report_json) {
  return guard([&] {
    require(manifest_path, "manifest_path");
    const auto report = diagnostics::profile_manifest(data::read_manifest(manifest_path));
    if (out_dir && *out_dir) diagnostics::write_profile(report, out_dir);
    emit(report_json, hog::report_json(report));
  });
}

hogf_status hogf_degrade_file(const char* in_path, const char* spec_json, uint64_t seed, const char* out_path) {
  return guard([&] {
    require(in_path, "in_path");
    require(spec_json, "spec_json");
    require(out_path, "out_path");
    auto spec = data::spec_from_json(parse(spec_json, "degradation spec"));
    spec.seed = seed;
    spec.validate();
    data::save_image(data::degrade(data::load_image(in_path), spec), out_path);
  });
}

hogf_status hogf_build_manifest(const char* root, const char* out_path, char** manifest_json) {
  return guard([&] {
    require(root, "root");
    const auto m = data::build_manifest(root);
    if (out_path && *out_path) data::write_manifest(m, out_path);
    emit(manifest_json, data::to_json(m));
  });
}

hogf_status hogf_make_corpus(const char* dir, const char* options_json, char** manifest_json) {
  return guard([&] {
    require(dir, "dir");
    const auto j = parse(options_json, "corpus options");
    if (!j.is_object()) throw ConfigError("corpus options must be a JSON object");
    data::CorpusOptions o;
    for (const auto& [k, v] : j.items()) {
      if (k == "images") {
        o.images = v.get<int>();
      } else if (k == "height") {
        o.height = v.get<std::int64_t>();
      } else if (k == "width") {
        o.width = v.get<std::int64_t>();
      } else if (k == "seed") {
        o.seed = v.get<std::uint64_t>();
      } else if (k == "specs") {
        for (const auto& s : v) o.specs.push_back(data::spec_from_json(s));
      } else {
        throw ConfigError("unknown corpus option '" + k + "'");
      }
    }
    emit(manifest_json, data::to_json(data::make_corpus(dir, o)));
  });
}

}  // extern "C"
