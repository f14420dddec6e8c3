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

#include "model/config.hpp"

#include <set>

#include "common/errors.hpp"

namespace hogformer::model {

blocks::BlockOptions ModelConfig::block_options() const {
  blocks::BlockOptions o;
  o.n_bin = n_bin;
  o.ldr_patch = ldr_patch;
  o.ffn_expansion = ffn_expansion;
  o.use_ldrconv = ldrconv;
  o.use_dhogsa = dhogsa;
  o.use_diff = diff;
  o.use_bhogr = bhogr;
  o.use_fhogr = fhogr;
  o.sqrt_heads_scaling = sqrt_heads_scaling;
  o.ldr_no_unsort = ldr_no_unsort;
  return o;
}

std::vector<std::string> ModelConfig::problems() const {
  std::vector<std::string> out;
  if (levels < 1 || levels > 6) out.push_back("levels must be in [1, 6], got " + std::to_string(levels));
  if (base_width < 2 || base_width % 2 != 0) {
    out.push_back("base_width must be even and >= 2, got " + std::to_string(base_width));
  }
  if (static_cast<int>(blocks_per_level.size()) != levels) {
    out.push_back("blocks_per_level has " + std::to_string(blocks_per_level.size()) +
                  " entries, expected " + std::to_string(levels));
  }
  if (static_cast<int>(heads_per_level.size()) != levels) {
    out.push_back("heads_per_level has " + std::to_string(heads_per_level.size()) +
                  " entries, expected " + std::to_string(levels));
  }
  for (std::size_t l = 0; l < blocks_per_level.size(); ++l) {
    if (blocks_per_level[l] < 0) out.push_back("blocks_per_level[" + std::to_string(l) + "] is negative");
  }
  for (std::size_t l = 0; l < heads_per_level.size(); ++l) {
    const int h = heads_per_level[l];
    if (h < 1) {
      out.push_back("heads_per_level[" + std::to_string(l) + "] must be >= 1");
    } else if (levels >= 1 && levels <= 6 && base_width > 0 && width(static_cast<int>(l)) % h != 0) {
      out.push_back("level " + std::to_string(l) + " width " + std::to_string(width(static_cast<int>(l))) +
                    " is not divisible by " + std::to_string(h) + " heads");
    }
  }
  if (n_bin < 2) out.push_back("n_bin must be >= 2, got " + std::to_string(n_bin));
  if (ldr_patch < 1) out.push_back("ldr_patch must be >= 1, got " + std::to_string(ldr_patch));
  if (ffn_expansion < 1) out.push_back("ffn_expansion must be >= 1, got " + std::to_string(ffn_expansion));
  if (dhogsa && !bhogr && !fhogr) out.push_back("dhogsa needs at least one of bhogr / fhogr");
  return out;
}

void ModelConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid model config:";
  for (const auto& s : p) msg += " " + s + ";";
  msg.pop_back();
  throw ConfigError(msg);
}

ModelConfig preset(const std::string& name) {
  ModelConfig c;
  if (name == "tiny") return c;
  if (name == "small") {
    c.base_width = 20;
    c.blocks_per_level = {2, 4, 4, 4};
    c.heads_per_level = {1, 2, 4, 8};
    return c;
  }
  if (name == "large") {
    c.base_width = 40;
    c.blocks_per_level = {3, 3, 5, 7};
    c.heads_per_level = {1, 2, 4, 8};
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected tiny, small or large)");
}

std::vector<std::string> preset_names() { return {"tiny", "small", "large"}; }

nlohmann::json to_json(const ModelConfig& c) {
  return {{"base_width", c.base_width},
          {"levels", c.levels},
          {"blocks_per_level", c.blocks_per_level},
          {"heads_per_level", c.heads_per_level},
          {"n_bin", c.n_bin},
          {"ldr_patch", c.ldr_patch},
          {"ffn_expansion", c.ffn_expansion},
          {"ldrconv", c.ldrconv},
          {"dhogsa", c.dhogsa},
          {"diff", c.diff},
          {"hog_loss", c.hog_loss},
          {"bhogr", c.bhogr},
          {"fhogr", c.fhogr},
          {"sqrt_heads_scaling", c.sqrt_heads_scaling},
          {"ldr_no_unsort", c.ldr_no_unsort},
          {"skip_fusion", c.skip_fusion == SkipFusion::kConcat ? "concat" : "add"}};
}

namespace {

template <typename V>
void read(const nlohmann::json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type: " + j.at(key).dump());
  }
}

}  // namespace

ModelConfig config_from_json(const nlohmann::json& j, const ModelConfig& base) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  static const std::set<std::string> known = {
      "base_width", "levels",  "blocks_per_level", "heads_per_level", "n_bin",
      "ldr_patch",  "ffn_expansion", "ldrconv",    "dhogsa",          "diff",
      "hog_loss",   "bhogr",   "fhogr",            "sqrt_heads_scaling", "ldr_no_unsort",
      "skip_fusion", "preset"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown model config key '" + k + "'");
  }
  ModelConfig c = base;
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError("config key 'preset' must be a string");
    c = preset(j.at("preset").get<std::string>());
  }
  read(j, "base_width", c.base_width);
  read(j, "levels", c.levels);
  read(j, "blocks_per_level", c.blocks_per_level);
  read(j, "heads_per_level", c.heads_per_level);
  read(j, "n_bin", c.n_bin);
  read(j, "ldr_patch", c.ldr_patch);
  read(j, "ffn_expansion", c.ffn_expansion);
  read(j, "ldrconv", c.ldrconv);
  read(j, "dhogsa", c.dhogsa);
  read(j, "diff", c.diff);
  read(j, "hog_loss", c.hog_loss);
  read(j, "bhogr", c.bhogr);
  read(j, "fhogr", c.fhogr);
  read(j, "sqrt_heads_scaling", c.sqrt_heads_scaling);
  read(j, "ldr_no_unsort", c.ldr_no_unsort);
  if (j.contains("skip_fusion")) {
    std::string s;
    read(j, "skip_fusion", s);
    if (s == "concat") {
      c.skip_fusion = SkipFusion::kConcat;
    } else if (s == "add") {
      c.skip_fusion = SkipFusion::kAdd;
    } else {
      throw ConfigError("skip_fusion must be 'concat' or 'add', got '" + s + "'");
    }
  }
  return c;
}

std::vector<std::string> config_differences(const ModelConfig& a, const ModelConfig& b) {
  const auto ja = to_json(a);
  const auto jb = to_json(b);
  std::vector<std::string> out;
  for (const auto& [k, v] : ja.items()) {
    if (jb.at(k) != v) out.push_back(k);
  }
  return out;
}

std::int64_t closed_form_param_count(const ModelConfig& cfg) {
  cfg.validate();
  const auto opt = cfg.block_options();
  const std::int64_t c0 = cfg.base_width;
  std::int64_t n = 27 * c0 + 27 * c0;  // stem and output head
  for (int l = 0; l < cfg.levels; ++l) {
    const std::int64_t c = cfg.width(l);
    n += cfg.blocks_per_level[static_cast<std::size_t>(l)] * blocks::hogtb_param_count(c, opt);
    if (l == cfg.levels - 1) continue;
    n += 8 * c * c + 8 * c * c;  // down and up resamplers
    if (cfg.skip_fusion == SkipFusion::kConcat) n += 2 * c * c;
    n += c * c + 9 * c + 2 * c * c;  // coarse skip
    n += cfg.blocks_per_level[static_cast<std::size_t>(l)] * blocks::hogtb_param_count(c, opt);
  }
  return n;
}

}  // namespace hogformer::model
