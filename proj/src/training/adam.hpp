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
#include <map>
#include <string>
#include <vector>

#include "model/checkpoint.hpp"
#include "tensor/tensor.hpp"

namespace hogformer::training {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over named parameters; moments are float buffers so
// they can be checkpointed next to the weights.
class Adam {
 public:
  struct Slot {
    std::string name;
    Tensor<float> param;
  };

  explicit Adam(std::vector<Slot> params, AdamOptions options = {});

  // Applies one update from the parameters' accumulated gradients. A
  // non-finite gradient throws NumericError naming the parameter before any
  // parameter is modified. Parameters without a gradient are left unchanged.
  void step(double lr);
  void zero_grad();

  std::int64_t steps() const { return t_; }
  model::OptimizerState state() const;
  // Restores moments saved by state(); missing entries start at zero.
  void load_state(const model::OptimizerState& s);

 private:
  std::vector<Slot> params_;
  AdamOptions options_;
  std::int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

// Cosine decay from lr0 at step 0 to lr_min at `total` steps.
double cosine_lr(double lr0, double lr_min, std::int64_t step, std::int64_t total);

}  // namespace hogformer::training
