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

#include "tst/tensor.hpp"

#include <sstream>
#include <utility>

#include "tst/error.hpp"

namespace tst {

namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::from(Shape shape, std::vector<double> data) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(data.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

Tensor Tensor::vector(std::vector<double> data) {
  const auto n = data.size();
  return from({n}, std::move(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data) {
  return from({rows, cols}, std::move(data));
}

Tensor Tensor::as_parameter() const {
  auto node = std::make_shared<detail::Node>();
  node->shape = shape();
  node->value = to_vector();
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::detach() const { return from(shape(), to_vector()); }

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return node_ ? node_->value.size() : 0; }

std::span<const double> Tensor::data() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->value;
}

std::vector<double> Tensor::to_vector() const {
  auto d = data();
  return {d.begin(), d.end()};
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " +
                         shape_string(shape()));
  }
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (rank() != 2) throw DimensionError("at(row, col) needs a matrix");
  return node_->value[r * node_->shape[1] + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor Tensor::make(Shape shape, std::vector<double> value,
                    std::vector<Tensor> parents, detail::BackwardFn backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->backward = std::move(backward);
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(std::move(p.node_));
    }
  }
  return Tensor(std::move(node));
}

Tensor Gradients::of(const Tensor& leaf) const {
  auto it = leaf_grads_.find(leaf.node());
  if (it == leaf_grads_.end()) return Tensor::zeros(leaf.shape());
  return Tensor::from(leaf.shape(), it->second);
}

bool Gradients::reached(const Tensor& leaf) const {
  return leaf_grads_.count(leaf.node()) != 0;
}

Gradients backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  Gradients result;
  const detail::Node* root = loss.node();
  if (!root->requires_grad) return result;

  // Post-order DFS gives an order where every node follows its parents.
  std::vector<const detail::Node*> order;
  std::unordered_map<const detail::Node*, std::size_t> index;
  std::vector<std::pair<const detail::Node*, std::size_t>> stack;
  std::unordered_map<const detail::Node*, bool> visited;
  stack.emplace_back(root, 0);
  visited[root] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited[parent]) {
        visited[parent] = true;
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    index[node] = order.size();
    order.push_back(node);
    stack.pop_back();
  }

  std::vector<std::vector<double>> grads(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    grads[i].assign(order[i]->value.size(), 0.0);
  }
  grads.back()[0] = 1.0;

  std::vector<double*> slots;
  for (std::size_t i = order.size(); i-- > 0;) {
    const detail::Node* node = order[i];
    if (node->is_leaf()) continue;
    slots.assign(node->parents.size(), nullptr);
    for (std::size_t p = 0; p < node->parents.size(); ++p) {
      const auto* parent = node->parents[p].get();
      if (parent->requires_grad) slots[p] = grads[index.at(parent)].data();
    }
    node->backward(*node, grads[i], slots);
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i]->is_leaf()) {
      result.leaf_grads_.emplace(order[i], std::move(grads[i]));
    }
  }
  return result;
}

}  // namespace tst
