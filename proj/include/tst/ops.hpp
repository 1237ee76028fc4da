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
#include <vector>

#include "tst/tensor.hpp"

namespace tst {

enum class UnaryOp { Neg, Tanh, Relu, Exp, Ln };
enum class BinaryOp { Add, Sub, Mul };

// Broadcasting is limited to identical shapes, or one side being a
// single-element tensor.
Tensor elementwise(UnaryOp op, const Tensor& x);
Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor ln(const Tensor& x);
Tensor scale(const Tensor& x, double factor);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& x);
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x, std::size_t axis);
// ln(sum(exp(x))) over a rank-1 tensor, returned as a scalar.
Tensor logsumexp(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
// Row `index` of a matrix, as a rank-1 tensor.
Tensor row(const Tensor& x, std::size_t index);
// Rows [begin, end) of a matrix.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
// Prefix [begin, end) of a rank-1 tensor.
Tensor slice(const Tensor& x, std::size_t begin, std::size_t end);
// Stacks equal-length rank-1 tensors into a matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);
// Concatenates rank-1 tensors (scalars count as length 1).
Tensor concat(const std::vector<Tensor>& parts);
// Single element at a flat index, as a scalar.
Tensor element(const Tensor& x, std::size_t flat);
// Elements at the given flat indices, as a rank-1 tensor.
Tensor gather(const Tensor& x, const std::vector<std::size_t>& flat);
// x[m x n] + bias[n] added to every row.
Tensor add_rowwise(const Tensor& x, const Tensor& bias);
// a[T x d], b[U x d] -> [(T*U) x d], row t*U+u equal to a[t] + b[u].
Tensor pairwise_sum(const Tensor& a, const Tensor& b);
// sum_k weights[k] * x[k, :] for x[n x d], weights[n] -> [d].
Tensor weighted_rows(const Tensor& x, const Tensor& weights);

}  // namespace tst
