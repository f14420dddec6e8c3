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
#include <string>
#include <vector>

#include <json.hpp>

#include "blocks/blocks.hpp"

namespace hogformer::model {

enum class SkipFusion { kConcat, kAdd };

struct ModelConfig {
  int base_width = 16;
  int levels = 4;
  std::vector<int> blocks_per_level{1, 1, 1, 1};
  std::vector<int> heads_per_level{1, 2, 2, 4};
  int n_bin = 9;
  int ldr_patch = 8;
  int ffn_expansion = 2;
  bool ldrconv = true;
  bool dhogsa = true;
  bool diff = true;
  bool hog_loss = true;
  bool bhogr = true;
  bool fhogr = true;
  bool sqrt_heads_scaling = false;
  bool ldr_no_unsort = false;
  SkipFusion skip_fusion = SkipFusion::kConcat;

  std::int64_t width(int level) const { return static_cast<std::int64_t>(base_width) << level; }
  blocks::BlockOptions block_options() const;

  // Every violated invariant, one message each; empty when valid.
  std::vector<std::string> problems() const;
  // Throws ConfigError joining all problems.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// "tiny", "small", "large".
ModelConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep `base` values; unknown keys and ill-typed values throw
// ConfigError.
ModelConfig config_from_json(const nlohmann::json& j, const ModelConfig& base = {});

// Names of the fields on which two configs differ.
std::vector<std::string> config_differences(const ModelConfig& a, const ModelConfig& b);

std::int64_t closed_form_param_count(const ModelConfig& cfg);

}  // namespace hogformer::model
