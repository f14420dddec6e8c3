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
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hogformer {

using Shape = std::vector<std::int64_t>;

std::int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Integer companion of Tensor: sort permutations, orientation bins. Never
// differentiable.
struct IndexArray {
  Shape shape;
  std::vector<std::int64_t> values;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  bool operator==(const IndexArray&) const = default;
};

template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
using BackwardFn = std::function<void(const Node<T>&)>;

// One vertex of the gradient graph. Non-leaf nodes own the closure that
// pushes their gradient into their parents.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<NodePtr<T>> parents;
  BackwardFn<T> backward_fn;

  bool is_leaf() const { return !backward_fn; }
  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

// Whether new ops record the graph. Thread-local.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Dense row-major tensor with shared (handle) semantics: copies alias the
// same node. Values are treated as immutable once an op has consumed them;
// only leaves (parameters) are mutated, and only between graphs.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(NodePtr<T> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  // Negative axes count from the back.
  std::int64_t dim(int axis) const;
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->data.size()); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> data_mut() { return node_->data; }
  T item() const;
  T at(std::initializer_list<std::int64_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad_mut() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.clear(); }

  // Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  // calls; callers zero them explicitly. Intermediate gradients are reset at
  // the start of each sweep.
  void backward() const;

  // Same values, no history.
  Tensor detach() const;
  Tensor clone_leaf(bool requires_grad) const;

  const NodePtr<T>& node() const { return node_; }

 private:
  NodePtr<T> node_;
};

// Builds an op output. When no parent requires a gradient (or recording is
// off) the result is a plain leaf and `fn` is dropped.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, const std::vector<Tensor<T>>& parents,
                      BackwardFn<T> fn);

// Adds `values` into parent `i`'s gradient if that parent wants one.
template <typename T>
inline std::vector<T>* parent_grad(const Node<T>& self, std::size_t i) {
  const auto& p = self.parents[i];
  if (!p || !p->requires_grad) return nullptr;
  return &p->ensure_grad();
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace hogformer
