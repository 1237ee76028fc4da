/*
 * Copyright 2026 The TST Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tst {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

class Tensor;

namespace detail {

struct Node;

// Backward closure: receives the node being differentiated, the gradient of
// the loss w.r.t. its value, and one gradient buffer per parent (nullptr when
// that parent does not participate in differentiation).
using BackwardFn = std::function<void(const Node& self,
                                      std::span<const double> grad_out,
                                      std::span<double* const> parent_grads)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<const Node>> parents;
  BackwardFn backward;

  bool is_leaf() const { return parents.empty(); }
};

}  // namespace detail

// Dense row-major float64 array. Copies are cheap and share the underlying
// node; the values of a tensor never change after construction.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> data);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> data);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data);

  // A fresh grad-tracked leaf holding a copy of this tensor's values.
  Tensor as_parameter() const;
  // A fresh untracked leaf holding a copy of this tensor's values.
  Tensor detach() const;

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  std::span<const double> data() const;
  std::vector<double> to_vector() const;

  double item() const;
  double operator[](std::size_t flat) const { return data()[flat]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  const detail::Node* node() const { return node_.get(); }

  // Used by op implementations.
  static Tensor make(Shape shape, std::vector<double> value,
                     std::vector<Tensor> parents, detail::BackwardFn backward);

 private:
  explicit Tensor(std::shared_ptr<const detail::Node> node)
      : node_(std::move(node)) {}

  std::shared_ptr<const detail::Node> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Result of one reverse sweep: d(loss)/d(leaf) for every grad-tracked leaf
// reachable from the loss.
class Gradients {
 public:
  // Gradient of the loss w.r.t. `leaf`; zeros if the leaf was unreachable.
  Tensor of(const Tensor& leaf) const;
  bool reached(const Tensor& leaf) const;

 private:
  friend Gradients backward(const Tensor& loss);
  std::unordered_map<const detail::Node*, std::vector<double>> leaf_grads_;
};

// Reverse-mode sweep from a scalar loss. Throws ContractError for non-scalars.
Gradients backward(const Tensor& loss);

}  // namespace tst
