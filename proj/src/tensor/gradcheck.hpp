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
#include <functional>
#include <vector>

#include "tensor/tensor.hpp"

namespace hogformer {

// Records the discrete choices a forward pass makes (sort permutations,
// orientation-bin floors) and replays them on later passes. The finite
// difference checker uses it so perturbed evaluations differentiate the same
// piecewise branch the backward pass differentiates.
class DecisionTape {
 public:
  enum class Mode { kRecord, kReplay };

  void set_mode(Mode mode) {
    mode_ = mode;
    cursor_ = 0;
    kink_ = false;
  }
  Mode mode() const { return mode_; }
  std::size_t size() const { return entries_.size(); }

  IndexArray decide(const std::function<IndexArray()>& compute);

  // Set by ops that find a replayed pass on the far side of a point where
  // the function is not differentiable (e.g. an orientation flip through a
  // zero gradient). Cleared by set_mode.
  void note_kink() { kink_ = true; }
  bool kink() const { return kink_; }

  // Active tape of the calling thread, or nullptr.
  static DecisionTape* active();

 private:
  friend class DecisionTapeScope;
  Mode mode_ = Mode::kRecord;
  std::size_t cursor_ = 0;
  bool kink_ = false;
  std::vector<IndexArray> entries_;
};

class DecisionTapeScope {
 public:
  explicit DecisionTapeScope(DecisionTape& tape);
  ~DecisionTapeScope();
  DecisionTapeScope(const DecisionTapeScope&) = delete;
  DecisionTapeScope& operator=(const DecisionTapeScope&) = delete;

 private:
  DecisionTape* previous_;
};

// Every discrete choice goes through here; without an active tape this is
// just compute().
IndexArray decide(const std::function<IndexArray()>& compute);

// True while a tape is replaying; ops call note_kink() only then.
bool replaying();
void note_kink();

struct GradCheckOptions {
  double eps = 1e-4;
  // Combine central differences at eps and eps/2, cancelling the O(eps^2)
  // truncation term.
  bool richardson = false;
  // Error denominators are at least scale_floor times the largest analytic
  // gradient magnitude over all inputs.
  double scale_floor = 0.0;
  // Coordinates probed per input; <= 0 probes all of them. When limited, the
  // probed coordinates are drawn with `seed`.
  std::int64_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::int64_t worst_coord = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::int64_t coords_checked = 0;
  // Coordinates whose perturbation crossed a kink; excluded from the error.
  std::int64_t kinks_skipped = 0;
};

using ScalarFn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

// Central differences (f(x+eps) - f(x-eps)) / (2 eps) per coordinate against
// the reverse-mode gradient; error is |a - n| / max(|a|, |n|, floor) with
// floor = max(1e-8, scale_floor * max |a| over all inputs).
// `inputs` are perturbed in place (and restored), so f may close over them.
GradCheckResult finite_diff_check(const ScalarFn& f, const std::vector<Tensor<double>>& inputs,
                                  GradCheckOptions options = {});

}  // namespace hogformer
