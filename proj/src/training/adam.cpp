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

#include "training/adam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"

namespace hogformer::training {

Adam::Adam(std::vector<Slot> params, AdamOptions options) : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    m_.emplace_back(static_cast<std::size_t>(p.param.numel()), 0.0f);
    v_.emplace_back(static_cast<std::size_t>(p.param.numel()), 0.0f);
  }
}

void Adam::step(double lr) {
  for (const auto& p : params_) {
    if (!p.param.has_grad()) continue;
    const auto g = p.param.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("non-finite gradient in parameter '" + p.name + "' at index " + std::to_string(i) +
                           " (step " + std::to_string(t_ + 1) + ")");
      }
    }
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (!p.param.has_grad()) continue;
    const auto g = p.param.grad();
    auto w = p.param.data_mut();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * gi);
      v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * gi * gi);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] = static_cast<float>(w[i] - lr * mhat / (std::sqrt(vhat) + options_.eps));
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.param.zero_grad();
}

model::OptimizerState Adam::state() const {
  model::OptimizerState s;
  s.t = t_;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    s.m[params_[k].name] = m_[k];
    s.v[params_[k].name] = v_[k];
  }
  return s;
}

void Adam::load_state(const model::OptimizerState& s) {
  t_ = s.t;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& name = params_[k].name;
    for (auto [table, dst] : {std::pair{&s.m, &m_[k]}, std::pair{&s.v, &v_[k]}}) {
      const auto it = table->find(name);
      if (it == table->end()) continue;
      if (it->second.size() != dst->size()) throw CheckpointError("optimizer state size mismatch for " + name);
      *dst = it->second;
    }
  }
}

double cosine_lr(double lr0, double lr_min, std::int64_t step, std::int64_t total) {
  if (total <= 0) return lr0;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace hogformer::training
