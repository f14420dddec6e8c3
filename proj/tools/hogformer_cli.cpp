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
// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hogformer/hogformer.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void info(const std::string& m) { hogf_log(1, m.c_str()); }

// Failure of a library call: single machine-parsable line on stderr.
struct Failure {
  std::string code;
  std::string message;
};

void check(hogf_status s) {
  if (s != HOGF_OK) throw Failure{hogf_status_name(s), hogf_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hogf_string_free(s);
  return out;
}

struct ModelHandle {
  hogf_model* p = nullptr;
  ~ModelHandle() { hogf_model_free(p); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!(f << text)) throw Failure{"io_error", "cannot write '" + path + "'"};
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure{"io_error", "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Options that map one-to-one onto JSON keys. Only options given on the
// command line or in the config file are emitted.
class JsonFlags {
 public:
  explicit JsonFlags(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    std::string dashed = key;
    for (auto& ch : dashed) ch = ch == '_' ? '-' : ch;
    std::string names = "--" + dashed;
    if (dashed != key) names += ",--" + key;
    CLI::Option* o = app_->add_option(names, *value, help);
    if constexpr (std::is_same_v<T, std::vector<int>>) o->delimiter(',');
    emitters_.push_back([o, value, key](json& j) {
      if (o->count() > 0) j[key] = *value;
    });
    return o;
  }

  void emit(json& j) const {
    for (const auto& e : emitters_) e(j);
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(json&)>> emitters_;
};

void add_model_flags(JsonFlags& f) {
  f.add<std::string>("preset", "tiny | small | large (default tiny)");
  f.add<int>("base_width", "channels at the first level");
  f.add<int>("levels", "encoder levels");
  f.add<std::vector<int>>("blocks_per_level", "HOG transformer blocks per level, comma separated");
  f.add<std::vector<int>>("heads_per_level", "attention heads per level, comma separated");
  f.add<int>("n_bin", "orientation bins (default 9)");
  f.add<int>("ldr_patch", "LDRConv patch size (default 8)");
  f.add<int>("ffn_expansion", "feed-forward expansion (default 2)");
  f.add<bool>("ldrconv", "use LDRConv (true|false)");
  f.add<bool>("dhogsa", "use HOG-sorted attention (true|false)");
  f.add<bool>("diff", "use the dynamic interaction FFN (true|false)");
  f.add<bool>("hog_loss", "train with the HOG loss term (true|false)");
  f.add<bool>("bhogr", "bin-wise reshaping branch (true|false)");
  f.add<bool>("fhogr", "frequency-wise reshaping branch (true|false)");
  f.add<bool>("sqrt_heads_scaling", "scale logits by 1/sqrt(heads)");
  f.add<bool>("ldr_no_unsort", "keep LDRConv features in sorted order");
  f.add<std::string>("skip_fusion", "concat | add");
}

// Values from a flat TOML file fill every option the command line left
// unset.
void apply_config_file(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  if (!std::filesystem::exists(path)) throw CLI::ValidationError("--config", "file not found: " + path);
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty()) {
      throw CLI::ValidationError("--config", "nested key '" + item.fullname() + "' (keys must be flat)");
    }
    CLI::Option* o = app->get_option_no_throw("--" + item.name);
    if (o == nullptr || item.name == "config") {
      throw CLI::ValidationError("--config", "unknown key '" + item.name + "' in " + path);
    }
    if (o->count() == 0) {
      o->add_result(item.inputs);
      o->run_callback();
    }
  }
}

struct Command {
  CLI::App* app = nullptr;
  std::string config;
  std::function<int()> run;
};

Command& with_config(Command& c) {
  c.app->add_option("--config", c.config, "TOML file with flat keys; command-line flags win");
  return c;
}

void log_resolved(const std::string& command, const json& args) {
  info("resolved " + command + " config: " + args.dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HOGformer all-in-one image restoration"};
  app.name("hogformer");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug | info | warn | error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const char* name, const char* help) -> Command& {
    commands.push_back(std::make_unique<Command>());
    commands.back()->app = app.add_subcommand(name, help);
    return *commands.back();
  };

  // train
  Command& train = with_config(add("train", "train a model; writes a checkpoint and a loss CSV"));
  JsonFlags train_model(train.app), train_flags(train.app);
  add_model_flags(train_model);
  std::string train_out, train_csv;
  train.app->add_option("--out,--checkpoint_out", train_out, "checkpoint path (required)");
  train.app->add_option("--log-csv,--log_csv", train_csv, "loss CSV (default <out>.loss.csv)");
  train_flags.add<std::string>("manifest", "training manifest JSON");
  train_flags.add<std::int64_t>("steps", "optimizer steps (default 1000)");
  train_flags.add<int>("batch", "batch size (default 2)");
  train_flags.add<std::int64_t>("crop", "crop size (default 64)");
  train_flags.add<double>("lr", "peak learning rate (default 3e-4)");
  train_flags.add<double>("lr_min", "final cosine learning rate (default 0)");
  train_flags.add<std::uint64_t>("seed", "seed for init and batches (default 0)");
  train_flags.add<bool>("flips", "random horizontal/vertical flips (default true)");
  train_flags.add<double>("alpha", "correlation loss weight (default 1)");
  train_flags.add<double>("beta", "HOG loss weight (default 1)");
  train_flags.add<std::int64_t>("eval_every", "evaluate every N steps (0 = never)");
  train_flags.add<int>("eval_images", "images used by periodic evaluation (default 4)");
  train_flags.add<std::int64_t>("checkpoint_every", "intermediate checkpoints every N steps");
  train_flags.add<std::string>("resume", "checkpoint to continue from");
  train.run = [&] {
    json model = json::object(), cfg = json::object();
    train_model.emit(model);
    train_flags.emit(cfg);
    if (!model.contains("preset")) model["preset"] = "tiny";
    char* resolved = nullptr;
    check(hogf_resolve_config(model.dump().c_str(), &resolved));
    cfg["model"] = json::parse(take(resolved));
    cfg["checkpoint_out"] = train_out;
    cfg["log_csv"] = train_csv.empty() ? train_out + ".loss.csv" : train_csv;
    log_resolved("train", cfg);
    char* summary = nullptr;
    check(hogf_train(
        cfg.dump().c_str(),
        [](const hogf_step* s, void*) {
          if (s->step % 10 == 0 || s->step == 1) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "step %lld total %.6f rec %.6f cor %.6f hog %.6f lr %.3g",
                          static_cast<long long>(s->step), s->total, s->l_rec, s->l_cor, s->l_hog, s->lr);
            hogf_log(1, buf);
          }
        },
        nullptr, &summary));
    std::cout << take(summary) << "\n";
    return kExitOk;
  };

  // restore
  Command& restore = add("restore", "restore one image with a checkpoint");
  std::string restore_ckpt, restore_in, restore_out;
  restore.app->add_option("--ckpt", restore_ckpt, "checkpoint")->required();
  restore.app->add_option("--in", restore_in, "degraded PNG/PPM")->required();
  restore.app->add_option("--out", restore_out, "output PNG (PPM if it ends in .ppm)")->required();
  restore.run = [&] {
    log_resolved("restore", {{"ckpt", restore_ckpt}, {"in", restore_in}, {"out", restore_out}});
    ModelHandle m;
    check(hogf_model_load(restore_ckpt.c_str(), &m.p));
    check(hogf_restore_file(m.p, restore_in.c_str(), restore_out.c_str()));
    info("wrote " + restore_out);
    return kExitOk;
  };

  // eval
  Command& eval = add("eval", "PSNR/SSIM of a checkpoint on a manifest");
  std::string eval_ckpt, eval_manifest, eval_out;
  eval.app->add_option("--ckpt", eval_ckpt, "checkpoint")->required();
  eval.app->add_option("--manifest", eval_manifest, "manifest JSON")->required();
  eval.app->add_option("--out", eval_out, "report JSON path (stdout when omitted)");
  eval.run = [&] {
    log_resolved("eval", {{"ckpt", eval_ckpt}, {"manifest", eval_manifest}, {"out", eval_out}});
    ModelHandle m;
    check(hogf_model_load(eval_ckpt.c_str(), &m.p));
    char* report = nullptr;
    check(hogf_eval(m.p, eval_manifest.c_str(), &report));
    const std::string text = take(report) + "\n";
    if (eval_out.empty()) {
      std::cout << text;
    } else {
      write_text(eval_out, text);
    }
    return kExitOk;
  };

  // grad-check
  Command& grad = add("grad-check", "64-bit finite-difference gradient checks");
  std::string grad_module = "all", grad_out;
  std::uint64_t grad_seed = 0;
  grad.app->add_option("--module", grad_module, "all | hog | blocks | model | loss")
      ->check(CLI::IsMember({"all", "hog", "blocks", "model", "loss"}));
  grad.app->add_option("--seed", grad_seed, "seed for inputs and weights");
  grad.app->add_option("--out", grad_out, "report JSON path (stdout when omitted)");
  grad.run = [&] {
    log_resolved("grad-check", {{"module", grad_module}, {"seed", grad_seed}, {"out", grad_out}});
    char* report = nullptr;
    int passed = 0;
    check(hogf_grad_check(grad_module.c_str(), grad_seed, &report, &passed));
    const std::string text = take(report);
    const auto parsed = json::parse(text);
    for (const auto& t : parsed.at("targets")) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%-20s max_rel_error %.3e  coords %lld  %.1fs  %s",
                    t.at("name").get<std::string>().c_str(), t.at("max_rel_error").get<double>(),
                    static_cast<long long>(t.at("coords_checked").get<std::int64_t>()),
                    t.at("seconds").get<double>(), t.at("passed").get<bool>() ? "PASS" : "FAIL");
      info(buf);
    }
    if (grad_out.empty()) {
      std::cout << text << "\n";
    } else {
      write_text(grad_out, text + "\n");
    }
    if (!passed) throw Failure{"grad_check_failed", "at least one target exceeds the tolerance"};
    return kExitOk;
  };

  // hog-profile
  Command& profile = add("hog-profile", "HOG degradation signatures of a manifest");
  std::string profile_manifest, profile_out;
  profile.app->add_option("--manifest", profile_manifest, "manifest JSON")->required();
  profile.app->add_option("--out", profile_out, "report directory")->required();
  profile.run = [&] {
    log_resolved("hog-profile", {{"manifest", profile_manifest}, {"out", profile_out}});
    char* report = nullptr;
    check(hogf_hog_profile(profile_manifest.c_str(), profile_out.c_str(), &report));
    const auto j = json::parse(take(report));
    info("accuracy " + std::to_string(j.at("accuracy").get<double>()) + ", separated pairs " +
         std::to_string(j.at("separated_pairs").get<int>()) + "/" + std::to_string(j.at("total_pairs").get<int>()));
    info("wrote " + profile_out);
    return kExitOk;
  };

  // degrade
  Command& degrade = add("degrade", "apply one synthetic degradation to an image");
  std::string degrade_in, degrade_spec, degrade_out;
  std::uint64_t degrade_seed = 0;
  degrade.app->add_option("--in", degrade_in, "clean PNG/PPM")->required();
  degrade.app->add_option("--spec", degrade_spec, "kind name, JSON object, or path to a JSON file")->required();
  degrade.app->add_option("--seed", degrade_seed, "seed (overrides the spec's)");
  degrade.app->add_option("--out", degrade_out, "output PNG")->required();
  degrade.run = [&] {
    json spec;
    if (!degrade_spec.empty() && degrade_spec.front() == '{') {
      spec = json::parse(degrade_spec);
    } else if (std::filesystem::is_regular_file(degrade_spec)) {
      spec = json::parse(read_text(degrade_spec));
    } else {
      spec = {{"kind", degrade_spec}};
    }
    log_resolved("degrade", {{"in", degrade_in}, {"spec", spec}, {"seed", degrade_seed}, {"out", degrade_out}});
    check(hogf_degrade_file(degrade_in.c_str(), spec.dump().c_str(), degrade_seed, degrade_out.c_str()));
    info("wrote " + degrade_out);
    return kExitOk;
  };

  // param-count
  Command& params = with_config(add("param-count", "closed-form and constructed parameter counts"));
  JsonFlags param_model(params.app);
  add_model_flags(param_model);
  params.run = [&] {
    json model = json::object();
    param_model.emit(model);
    if (!model.contains("preset")) model["preset"] = "tiny";
    char* resolved = nullptr;
    check(hogf_resolve_config(model.dump().c_str(), &resolved));
    const auto cfg = json::parse(take(resolved));
    log_resolved("param-count", cfg);
    std::int64_t closed = 0, built = 0;
    check(hogf_param_count(cfg.dump().c_str(), &closed, &built));
    std::cout << json{{"closed_form", closed}, {"constructed", built}, {"match", closed == built}}.dump(2) << "\n";
    if (closed != built) throw Failure{"param_count_mismatch", "closed form and constructed counts differ"};
    return kExitOk;
  };

  // make-corpus
  Command& corpus = add("make-corpus", "write a seeded synthetic corpus and its manifest");
  std::string corpus_dir;
  JsonFlags corpus_flags(corpus.app);
  corpus.app->add_option("--dir", corpus_dir, "output directory")->required();
  corpus_flags.add<int>("images", "clean sources (default 20)");
  corpus_flags.add<std::int64_t>("height", "image height (default 64)");
  corpus_flags.add<std::int64_t>("width", "image width (default 64)");
  corpus_flags.add<std::uint64_t>("seed", "corpus seed (default 0)");
  corpus.run = [&] {
    json opts = json::object();
    corpus_flags.emit(opts);
    log_resolved("make-corpus", {{"dir", corpus_dir}, {"options", opts}});
    char* manifest = nullptr;
    check(hogf_make_corpus(corpus_dir.c_str(), opts.dump().c_str(), &manifest));
    info("wrote " + std::to_string(json::parse(take(manifest)).at("entries").size()) + " manifest entries to " +
         corpus_dir);
    return kExitOk;
  };

  // build-manifest
  Command& build = add("build-manifest", "manifest from a directory of clean images and specs.json");
  std::string build_root, build_out;
  build.app->add_option("--root", build_root, "image directory")->required();
  build.app->add_option("--out", build_out, "manifest path (default <root>/manifest.json)");
  build.run = [&] {
    const std::string out = build_out.empty() ? (std::filesystem::path(build_root) / "manifest.json").string()
                                              : build_out;
    log_resolved("build-manifest", {{"root", build_root}, {"out", out}});
    char* manifest = nullptr;
    check(hogf_build_manifest(build_root.c_str(), out.c_str(), &manifest));
    take(manifest);
    info("wrote " + out);
    return kExitOk;
  };

  try {
    app.parse(argc, argv);
    for (auto& c : commands) {
      if (c->app->parsed()) apply_config_file(c->app, c->config);
    }
    if (train.app->parsed() && train_out.empty()) throw CLI::RequiredError("--out");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const int levels[] = {0, 1, 2, 3};
  const char* names[] = {"debug", "info", "warn", "error"};
  for (int i = 0; i < 4; ++i) {
    if (log_level == names[i]) hogf_set_log_level(levels[i]);
  }

  for (auto& c : commands) {
    if (!c->app->parsed()) continue;
    try {
      return c->run();
    } catch (const Failure& f) {
      std::fprintf(stderr, "hogformer: error[%s]: %s\n", f.code.c_str(), f.message.c_str());
      return kExitRuntime;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "hogformer: error[internal_error]: %s\n", e.what());
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
