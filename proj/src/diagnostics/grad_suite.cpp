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
#include "diagnostics/grad_suite.hpp"

#include <algorithm>
#include <chrono>

#include "blocks/blocks.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "hog/hog.hpp"
#include "model/model.hpp"
#include "tensor/ops.hpp"
#include "training/losses.hpp"

namespace hogformer::diagnostics {

namespace {

using T = double;
using Clock = std::chrono::steady_clock;

Tensor<T> uniform(Shape shape, Rng& rng) {
  std::vector<T> v(static_cast<std::size_t>(numel(shape)));
  for (auto& x : v) x = rng.uniform();
  return Tensor<T>::from_data(std::move(shape), std::move(v), true);
}

Tensor<T> normal(Shape shape, Rng& rng) {
  std::vector<T> v(static_cast<std::size_t>(numel(shape)));
  for (auto& x : v) x = rng.normal();
  return Tensor<T>::from_data(std::move(shape), std::move(v), true);
}

// sum(w * y) with w drawn once, lazily, at y's shape.
class Weighted {
 public:
  explicit Weighted(std::uint64_t seed) : rng_(seed) {}
  Tensor<T> operator()(const Tensor<T>& y) {
    if (!w_.defined() || w_.shape() != y.shape()) {
      w_ = normal(y.shape(), rng_);
      w_.set_requires_grad(false);
    }
    return ops::sum_all(ops::mul(y, w_));
  }

 private:
  Rng rng_;
  Tensor<T> w_;
};

template <typename P>
std::vector<Tensor<T>> params_of(P& p) {
  std::vector<Tensor<T>> out;
  p.visit("", [&](const std::string&, Tensor<T>& t) { out.push_back(t); });
  return out;
}

std::vector<Tensor<T>> with_input(const Tensor<T>& x, std::vector<Tensor<T>> params) {
  params.insert(params.begin(), x);
  return params;
}

class Suite {
 public:
  explicit Suite(const GradSuiteOptions& o) : o_(o), rng_(mix_seed(o.seed, 0x6772616463ull)) {}

  void run(const std::string& name, const std::string& module, const ScalarFn& f,
           const std::vector<Tensor<T>>& inputs, std::int64_t max_coords = 0) {
    const auto t0 = Clock::now();
    GradCheckOptions go;
    go.eps = o_.eps;
    go.richardson = o_.richardson;
    go.scale_floor = o_.scale_floor;
    go.max_coords_per_input = max_coords;
    go.seed = mix_seed(o_.seed, results_.size());
    GradTargetResult r;
    r.name = name;
    r.module = module;
    r.check = finite_diff_check(f, inputs, go);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.passed = r.check.max_rel_error < o_.tolerance;
    results_.push_back(r);
  }

  // Merges a follow-up check into the last result (same target, other inputs).
  void merge_last(const ScalarFn& f, const std::vector<Tensor<T>>& inputs, std::int64_t max_coords) {
    auto prev = results_.back();
    results_.pop_back();
    run(prev.name, prev.module, f, inputs, max_coords);
    auto& cur = results_.back();
    cur.seconds += prev.seconds;
    cur.check.coords_checked += prev.check.coords_checked;
    cur.check.kinks_skipped += prev.check.kinks_skipped;
    if (prev.check.max_rel_error >= cur.check.max_rel_error) {
      const auto coords = cur.check.coords_checked;
      const auto kinks = cur.check.kinks_skipped;
      cur.check = prev.check;
      cur.check.coords_checked = coords;
      cur.check.kinks_skipped = kinks;
    }
    cur.passed = cur.check.max_rel_error < o_.tolerance;
  }

  Rng& rng() { return rng_; }
  std::uint64_t seed(std::uint64_t k) const { return mix_seed(o_.seed, k); }
  std::vector<GradTargetResult> take() { return std::move(results_); }
  const GradSuiteOptions& options() const { return o_; }

 private:
  GradSuiteOptions o_;
  Rng rng_;
  std::vector<GradTargetResult> results_;
};

void hog_targets(Suite& s) {
  auto x = uniform({1, 3, 16, 16}, s.rng());
  Weighted w(s.seed(1));
  s.run("soft_cell_histogram", "hog",
        [&](const std::vector<Tensor<T>>&) { return w(hog::soft_cell_histogram(x, 8, 9)); }, {x});
}

void loss_targets(Suite& s) {
  // |pred - gt| >= 0.05 everywhere keeps the L1 term away from its kink.
  auto pred = uniform({1, 3, 16, 16}, s.rng());
  std::vector<T> g(static_cast<std::size_t>(pred.numel()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    pred.data_mut()[i] = 0.3 + 0.4 * pred.data()[i];
    const double off = s.rng().uniform(0.05, 0.25);
    g[i] = pred.data()[i] + (s.rng().coin() ? off : -off);
  }
  auto gt = Tensor<T>::from_data(pred.shape(), std::move(g));
  s.run("hog_loss", "loss", [&](const std::vector<Tensor<T>>&) { return training::hog_loss(pred, gt); }, {pred});
  s.run("pearson_loss", "loss", [&](const std::vector<Tensor<T>>&) { return training::pearson_loss(pred, gt); },
        {pred});
  s.run("rec_loss", "loss", [&](const std::vector<Tensor<T>>&) { return training::rec_loss(pred, gt); }, {pred});
  s.run("total_loss", "loss",
        [&](const std::vector<Tensor<T>>&) { return training::total_loss(pred, gt, {}).total; }, {pred});
}

void block_targets(Suite& s) {
  const blocks::BlockOptions opt;
  blocks::Initializer<T> init(s.seed(2));
  {
    auto x = normal({1, 4, 8, 8}, s.rng());
    auto p = blocks::make_ldrconv<T>(4, opt, init);
    Weighted w(s.seed(3));
    s.run("ldrconv_forward", "blocks",
          [&](const std::vector<Tensor<T>>&) { return w(blocks::ldrconv_forward(x, p)); },
          with_input(x, params_of(p)));
  }
  {
    auto x = normal({1, 4, 8, 8}, s.rng());
    auto p = blocks::make_dhogsa<T>(4, 2, opt, init);
    Weighted w(s.seed(4));
    s.run("dhogsa_forward", "blocks",
          [&](const std::vector<Tensor<T>>&) { return w(blocks::dhogsa_forward(x, p)); },
          with_input(x, params_of(p)));
  }
  {
    auto x = normal({1, 4, 8, 8}, s.rng());
    auto p = blocks::make_diff<T>(4, opt, init);
    Weighted w(s.seed(5));
    s.run("diff_forward", "blocks", [&](const std::vector<Tensor<T>>&) { return w(blocks::diff_forward(x, p)); },
          with_input(x, params_of(p)));
  }
  {
    auto x = normal({1, 4, 8, 8}, s.rng());
    auto p = blocks::make_hogtb<T>(4, 2, opt, init);
    Weighted w(s.seed(6));
    s.run("hogtb_forward", "blocks", [&](const std::vector<Tensor<T>>&) { return w(blocks::hogtb_forward(x, p)); },
          with_input(x, params_of(p)));
  }
}

void model_targets(Suite& s) {
  auto m = model::build_model<T>(model::preset("tiny"), s.seed(7));
  // The head starts at zero, which would zero every upstream gradient.
  blocks::Initializer<T> init(s.seed(8));
  const auto head = init.conv(m.head.shape());
  std::copy(head.data().begin(), head.data().end(), m.head.data_mut().begin());

  auto x = uniform({1, 3, 16, 16}, s.rng());
  Weighted w(s.seed(9));
  const ScalarFn f = [&](const std::vector<Tensor<T>>&) { return w(model::forward(m, x)); };
  s.run("tiny_model", "model", f, {x}, s.options().model_input_coords);
  std::vector<Tensor<T>> params;
  m.visit([&](const std::string&, Tensor<T>& t) { params.push_back(t); });
  s.merge_last(f, params, s.options().model_param_coords);
}

}  // namespace

std::vector<std::string> grad_suite_modules() { return {"all", "hog", "blocks", "model", "loss"}; }

std::vector<GradTargetResult> run_grad_suite(const GradSuiteOptions& options) {
  const auto mods = grad_suite_modules();
  if (std::find(mods.begin(), mods.end(), options.module) == mods.end()) {
    throw ConfigError("grad-check: unknown module '" + options.module + "' (all|hog|blocks|model|loss)");
  }
  Suite s(options);
  auto want = [&](const char* m) { return options.module == "all" || options.module == m; };
  if (want("hog")) hog_targets(s);
  if (want("loss")) loss_targets(s);
  if (want("blocks")) block_targets(s);
  if (want("model")) model_targets(s);
  return s.take();
}

nlohmann::json to_json(const std::vector<GradTargetResult>& results) {
  nlohmann::json targets = nlohmann::json::array();
  bool all = true;
  double worst = 0.0;
  for (const auto& r : results) {
    all = all && r.passed;
    worst = std::max(worst, r.check.max_rel_error);
    targets.push_back({{"name", r.name},
                       {"module", r.module},
                       {"max_rel_error", r.check.max_rel_error},
                       {"coords_checked", r.check.coords_checked},
                       {"kinks_skipped", r.check.kinks_skipped},
                       {"worst_input", r.check.worst_input},
                       {"worst_coord", r.check.worst_coord},
                       {"analytic", r.check.worst_analytic},
                       {"numeric", r.check.worst_numeric},
                       {"seconds", r.seconds},
                       {"passed", r.passed}});
  }
  return {{"targets", targets}, {"max_rel_error", worst}, {"passed", all}};
}

}  // namespace hogformer::diagnostics
