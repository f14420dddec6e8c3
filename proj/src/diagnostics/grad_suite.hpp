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

#include <string>
#include <vector>

#include <json.hpp>

#include "tensor/gradcheck.hpp"

namespace hogformer::diagnostics {

inline constexpr double kGradTolerance = 1e-4;

struct GradTargetResult {
  std::string name;
  std::string module;  // hog, loss, blocks, model
  GradCheckResult check;
  double seconds = 0.0;
  bool passed = false;
};

struct GradSuiteOptions {
  std::string module = "all";  // all | hog | blocks | model | loss
  double tolerance = kGradTolerance;
  double eps = 1e-4;
  bool richardson = true;
  double scale_floor = 1e-3;
  std::uint64_t seed = 0;
  // Parameter coordinates probed per tensor for the full-model target.
  std::int64_t model_param_coords = 3;
  std::int64_t model_input_coords = 64;
};

std::vector<std::string> grad_suite_modules();

// 64-bit central-difference checks of every differentiable component, each
// reduced to a scalar by a fixed random weighting. Throws ConfigError for an
// unknown module.
std::vector<GradTargetResult> run_grad_suite(const GradSuiteOptions& options);

nlohmann::json to_json(const std::vector<GradTargetResult>& results);

}  // namespace hogformer::diagnostics
