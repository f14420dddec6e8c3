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

#include "tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/errors.hpp"

namespace hogformer {
namespace {
thread_local DecisionTape* t_active_tape = nullptr;
}  // namespace

DecisionTape* DecisionTape::active() { return t_active_tape; }

IndexArray DecisionTape::decide(const std::function<IndexArray()>& compute) {
  if (mode_ == Mode::kRecord) {
    entries_.push_back(compute());
    return entries_.back();
  }
  if (cursor_ >= entries_.size()) {
    throw UsageError("decision tape exhausted: replayed pass made more choices than recorded");
  }
  return entries_[cursor_++];
}

DecisionTapeScope::DecisionTapeScope(DecisionTape& tape) : previous_(t_active_tape) {
  t_active_tape = &tape;
}

DecisionTapeScope::~DecisionTapeScope() { t_active_tape = previous_; }

IndexArray decide(const std::function<IndexArray()>& compute) {
  if (auto* tape = DecisionTape::active()) return tape->decide(compute);
  return compute();
}

bool replaying() {
  const auto* tape = DecisionTape::active();
  return tape != nullptr && tape->mode() == DecisionTape::Mode::kReplay;
}

void note_kink() {
  if (auto* tape = DecisionTape::active()) tape->note_kink();
}

GradCheckResult finite_diff_check(const ScalarFn& f, const std::vector<Tensor<double>>& inputs,
                                  GradCheckOptions options) {
  std::vector<Tensor<double>> xs = inputs;
  for (auto& x : xs) {
    if (!x.node()->is_leaf()) throw UsageError("finite_diff_check: inputs must be leaves");
    x.set_requires_grad(true);
    x.zero_grad();
  }

  DecisionTape tape;
  std::vector<std::vector<double>> analytic;
  {
    DecisionTapeScope scope(tape);
    tape.set_mode(DecisionTape::Mode::kRecord);
    const Tensor<double> y = f(xs);
    if (y.numel() != 1) throw UsageError("finite_diff_check: f must be scalar-valued");
    y.backward();
  }
  for (auto& x : xs) {
    if (x.has_grad()) {
      analytic.emplace_back(x.grad().begin(), x.grad().end());
    } else {
      analytic.emplace_back(static_cast<std::size_t>(x.numel()), 0.0);
    }
  }

  bool kinked = false;
  auto eval = [&]() {
    NoGradGuard no_grad;
    DecisionTapeScope scope(tape);
    tape.set_mode(DecisionTape::Mode::kReplay);
    const double v = f(xs).item();
    kinked = kinked || tape.kink();
    return v;
  };

  double scale = 0.0;
  for (const auto& g : analytic)
    for (double v : g) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-8, options.scale_floor * scale);

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto data = xs[i].data_mut();
    std::vector<std::int64_t> coords(data.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_input > 0 &&
        static_cast<std::int64_t>(coords.size()) > options.max_coords_per_input) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(options.max_coords_per_input));
      std::sort(coords.begin(), coords.end());
    }
    for (std::int64_t c : coords) {
      const double saved = data[c];
      auto central = [&](double h) {
        data[c] = saved + h;
        const double fp = eval();
        data[c] = saved - h;
        const double fm = eval();
        data[c] = saved;
        return (fp - fm) / (2.0 * h);
      };
      kinked = false;
      const double d1 = central(options.eps);
      const double numeric = options.richardson ? (4.0 * central(0.5 * options.eps) - d1) / 3.0 : d1;
      if (kinked) {
        ++result.kinks_skipped;
        continue;
      }
      const double a = analytic[i][c];
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.coords_checked;
      if (err > result.max_rel_error || result.worst_coord < 0) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst_input = i;
        result.worst_coord = c;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace hogformer
