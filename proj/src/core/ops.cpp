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

#include "tst/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tst/error.hpp"

namespace tst {

namespace {

using detail::Node;
using Grads = std::span<double* const>;
using GradOut = std::span<const double>;

const std::vector<double>& parent_value(const Node& self, std::size_t i) {
  return self.parents[i]->value;
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_string(x.shape()));
  }
}

void require_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(op) + ": non-finite input");
    }
  }
}

}  // namespace

Tensor elementwise(UnaryOp op, const Tensor& x) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  switch (op) {
    case UnaryOp::Neg:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
      return Tensor::make(x.shape(), std::move(out), {x},
                          [](const Node&, GradOut g, Grads pg) {
                            for (std::size_t i = 0; i < g.size(); ++i)
                              pg[0][i] -= g[i];
                          });
    case UnaryOp::Tanh:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      return Tensor::make(x.shape(), std::move(out), {x},
                          [](const Node& self, GradOut g, Grads pg) {
                            const auto& y = self.value;
                            for (std::size_t i = 0; i < g.size(); ++i)
                              pg[0][i] += g[i] * (1.0 - y[i] * y[i]);
                          });
    case UnaryOp::Relu:
      for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
      return Tensor::make(x.shape(), std::move(out), {x},
                          [](const Node& self, GradOut g, Grads pg) {
                            const auto& xv = parent_value(self, 0);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              if (xv[i] > 0.0) pg[0][i] += g[i];
                          });
    case UnaryOp::Exp:
      for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i]);
        if (!std::isfinite(out[i])) {
          throw DomainError("exp: result not finite for input " +
                            std::to_string(in[i]));
        }
      }
      return Tensor::make(x.shape(), std::move(out), {x},
                          [](const Node& self, GradOut g, Grads pg) {
                            const auto& y = self.value;
                            for (std::size_t i = 0; i < g.size(); ++i)
                              pg[0][i] += g[i] * y[i];
                          });
    case UnaryOp::Ln:
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > 0.0)) {
          throw DomainError("ln: non-positive input " + std::to_string(in[i]));
        }
        out[i] = std::log(in[i]);
      }
      return Tensor::make(x.shape(), std::move(out), {x},
                          [](const Node& self, GradOut g, Grads pg) {
                            const auto& xv = parent_value(self, 0);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              pg[0][i] += g[i] / xv[i];
                          });
  }
  throw ContractError("unknown unary op");
}

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool a_scalar = a.numel() == 1;
  const bool b_scalar = b.numel() == 1;
  if (!same && !a_scalar && !b_scalar) {
    throw DimensionError("elementwise: incompatible shapes " +
                         shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  // Result takes the shape of the non-broadcast side.
  const Shape shape = (same || b_scalar) ? a.shape() : b.shape();
  const std::size_t n = shape_numel(shape);
  const std::size_t sa = (a.numel() == n) ? 1 : 0;
  const std::size_t sb = (b.numel() == n) ? 1 : 0;
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(n);
  switch (op) {
    case BinaryOp::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i * sa] + bv[i * sb];
      break;
    case BinaryOp::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i * sa] - bv[i * sb];
      break;
    case BinaryOp::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i * sa] * bv[i * sb];
      break;
  }
  return Tensor::make(
      shape, std::move(out), {a, b},
      [op, sa, sb](const Node& self, GradOut g, Grads pg) {
        const auto& av = parent_value(self, 0);
        const auto& bv = parent_value(self, 1);
        for (std::size_t i = 0; i < g.size(); ++i) {
          double da = 0.0;
          double db = 0.0;
          switch (op) {
            case BinaryOp::Add:
              da = g[i];
              db = g[i];
              break;
            case BinaryOp::Sub:
              da = g[i];
              db = -g[i];
              break;
            case BinaryOp::Mul:
              da = g[i] * bv[i * sb];
              db = g[i] * av[i * sa];
              break;
          }
          if (pg[0]) pg[0][i * sa] += da;
          if (pg[1]) pg[1][i * sb] += db;
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(BinaryOp::Add, a, b);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise(BinaryOp::Sub, a, b);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise(BinaryOp::Mul, a, b);
}
Tensor neg(const Tensor& x) { return elementwise(UnaryOp::Neg, x); }
Tensor tanh(const Tensor& x) { return elementwise(UnaryOp::Tanh, x); }
Tensor relu(const Tensor& x) { return elementwise(UnaryOp::Relu, x); }
Tensor exp(const Tensor& x) { return elementwise(UnaryOp::Exp, x); }
Tensor ln(const Tensor& x) { return elementwise(UnaryOp::Ln, x); }

Tensor scale(const Tensor& x, double factor) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor;
  return Tensor::make(x.shape(), std::move(out), {x},
                      [factor](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < g.size(); ++i)
                          pg[0][i] += g[i] * factor;
                      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) +
                         " by " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return Tensor::make(
      {m, n}, std::move(out), {a, b},
      [m, k, n](const Node& self, GradOut g, Grads pg) {
        const auto& av = parent_value(self, 0);
        const auto& bv = parent_value(self, 1);
        if (pg[0]) {
          // dA = G * B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j)
                acc += g[i * n + j] * bv[p * n + j];
              pg[0][i * k + p] += acc;
            }
        }
        if (pg[1]) {
          // dB = A^T * G
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              for (std::size_t j = 0; j < n; ++j)
                pg[1][p * n + j] += aip * g[i * n + j];
            }
        }
      });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return Tensor::make({}, {acc}, {x}, [](const Node& self, GradOut g, Grads pg) {
    const std::size_t n = parent_value(self, 0).size();
    for (std::size_t i = 0; i < n; ++i) pg[0][i] += g[0];
  });
}

namespace {

// Strided view of the reduction axis: `outer` blocks, each with `len` entries
// along the axis spaced `inner` apart.
struct AxisLayout {
  std::size_t outer = 1, len = 1, inner = 1;
  std::size_t at(std::size_t o, std::size_t k, std::size_t i) const {
    return (o * len + k) * inner + i;
  }
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(shape));
  }
  AxisLayout l;
  for (std::size_t d = 0; d < axis; ++d) l.outer *= shape[d];
  l.len = shape[axis];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) l.inner *= shape[d];
  if (l.len == 0) {
    throw DimensionError(std::string(op) + ": empty reduction axis");
  }
  return l;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto l = axis_layout(x.shape(), axis, "softmax");
  const auto in = x.data();
  require_finite(in, "softmax");
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t i = 0; i < l.inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < l.len; ++k) mx = std::max(mx, in[l.at(o, k, i)]);
      double z = 0.0;
      for (std::size_t k = 0; k < l.len; ++k) {
        const auto idx = l.at(o, k, i);
        out[idx] = std::exp(in[idx] - mx);
        z += out[idx];
      }
      for (std::size_t k = 0; k < l.len; ++k) out[l.at(o, k, i)] /= z;
    }
  return Tensor::make(x.shape(), std::move(out), {x},
                      [l](const Node& self, GradOut g, Grads pg) {
                        const auto& y = self.value;
                        for (std::size_t o = 0; o < l.outer; ++o)
                          for (std::size_t i = 0; i < l.inner; ++i) {
                            double dot = 0.0;
                            for (std::size_t k = 0; k < l.len; ++k) {
                              const auto idx = l.at(o, k, i);
                              dot += g[idx] * y[idx];
                            }
                            for (std::size_t k = 0; k < l.len; ++k) {
                              const auto idx = l.at(o, k, i);
                              pg[0][idx] += y[idx] * (g[idx] - dot);
                            }
                          }
                      });
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
  const auto l = axis_layout(x.shape(), axis, "log_softmax");
  const auto in = x.data();
  require_finite(in, "log_softmax");
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t i = 0; i < l.inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < l.len; ++k) mx = std::max(mx, in[l.at(o, k, i)]);
      double z = 0.0;
      for (std::size_t k = 0; k < l.len; ++k) z += std::exp(in[l.at(o, k, i)] - mx);
      const double lz = mx + std::log(z);
      for (std::size_t k = 0; k < l.len; ++k) {
        const auto idx = l.at(o, k, i);
        out[idx] = in[idx] - lz;
      }
    }
  return Tensor::make(x.shape(), std::move(out), {x},
                      [l](const Node& self, GradOut g, Grads pg) {
                        const auto& y = self.value;
                        for (std::size_t o = 0; o < l.outer; ++o)
                          for (std::size_t i = 0; i < l.inner; ++i) {
                            double gsum = 0.0;
                            for (std::size_t k = 0; k < l.len; ++k)
                              gsum += g[l.at(o, k, i)];
                            for (std::size_t k = 0; k < l.len; ++k) {
                              const auto idx = l.at(o, k, i);
                              pg[0][idx] += g[idx] - std::exp(y[idx]) * gsum;
                            }
                          }
                      });
}

Tensor logsumexp(const Tensor& x) {
  if (x.numel() == 0) throw DimensionError("logsumexp: empty input");
  const auto in = x.data();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : in) mx = std::max(mx, v);
  double result = mx;
  if (std::isfinite(mx)) {
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    result = mx + std::log(z);
  }
  return Tensor::make({}, {result}, {x},
                      [](const Node& self, GradOut g, Grads pg) {
                        const double out = self.value[0];
                        if (!std::isfinite(out)) return;
                        const auto& xv = parent_value(self, 0);
                        for (std::size_t i = 0; i < xv.size(); ++i)
                          pg[0][i] += g[0] * std::exp(xv[i] - out);
                      });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) +
                         " as " + shape_string(shape));
  }
  return Tensor::make(std::move(shape), x.to_vector(), {x},
                      [](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < g.size(); ++i)
                          pg[0][i] += g[i];
                      });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_rows");
  if (begin > end || end > x.dim(0)) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of bounds for " +
                         shape_string(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  const auto in = x.data();
  std::vector<double> out(in.begin() + begin * cols, in.begin() + end * cols);
  const std::size_t offset = begin * cols;
  return Tensor::make({end - begin, cols}, std::move(out), {x},
                      [offset](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < g.size(); ++i)
                          pg[0][offset + i] += g[i];
                      });
}

Tensor row(const Tensor& x, std::size_t index) {
  require_rank(x, 2, "row");
  if (index >= x.dim(0)) {
    throw DimensionError("row: index " + std::to_string(index) +
                         " out of bounds for " + shape_string(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  const auto in = x.data();
  std::vector<double> out(in.begin() + index * cols,
                          in.begin() + (index + 1) * cols);
  const std::size_t offset = index * cols;
  return Tensor::make({cols}, std::move(out), {x},
                      [offset](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < g.size(); ++i)
                          pg[0][offset + i] += g[i];
                      });
}

Tensor slice(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 1, "slice");
  if (begin > end || end > x.dim(0)) {
    throw DimensionError("slice: range out of bounds for " +
                         shape_string(x.shape()));
  }
  const auto in = x.data();
  std::vector<double> out(in.begin() + begin, in.begin() + end);
  return Tensor::make({end - begin}, std::move(out), {x},
                      [begin](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < g.size(); ++i)
                          pg[0][begin + i] += g[i];
                      });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::size_t cols = rows.front().numel();
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.rank() != 1 || r.numel() != cols) {
      throw DimensionError("stack_rows: row shape " + shape_string(r.shape()) +
                           " does not match [" + std::to_string(cols) + "]");
    }
    const auto d = r.data();
    out.insert(out.end(), d.begin(), d.end());
  }
  return Tensor::make({rows.size(), cols}, std::move(out), rows,
                      [cols](const Node&, GradOut g, Grads pg) {
                        for (std::size_t r = 0; r < pg.size(); ++r) {
                          if (!pg[r]) continue;
                          for (std::size_t c = 0; c < cols; ++c)
                            pg[r][c] += g[r * cols + c];
                        }
                      });
}

Tensor concat(const std::vector<Tensor>& parts) {
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.rank() > 1) {
      throw DimensionError("concat: expected rank <= 1, got " +
                           shape_string(p.shape()));
    }
    offsets.push_back(out.size());
    const auto d = p.data();
    out.insert(out.end(), d.begin(), d.end());
  }
  if (out.empty()) throw DimensionError("concat: empty result");
  const std::size_t n = out.size();
  return Tensor::make({n}, std::move(out), parts,
                      [offsets](const Node& self, GradOut g, Grads pg) {
                        for (std::size_t p = 0; p < pg.size(); ++p) {
                          if (!pg[p]) continue;
                          const auto len = self.parents[p]->value.size();
                          for (std::size_t i = 0; i < len; ++i)
                            pg[p][i] += g[offsets[p] + i];
                        }
                      });
}

Tensor element(const Tensor& x, std::size_t flat) {
  if (flat >= x.numel()) {
    throw DimensionError("element: index " + std::to_string(flat) +
                         " out of bounds for " + shape_string(x.shape()));
  }
  return Tensor::make({}, {x.data()[flat]}, {x},
                      [flat](const Node&, GradOut g, Grads pg) {
                        pg[0][flat] += g[0];
                      });
}

Tensor gather(const Tensor& x, const std::vector<std::size_t>& flat) {
  const auto in = x.data();
  std::vector<double> out(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (flat[i] >= in.size()) {
      throw DimensionError("gather: index " + std::to_string(flat[i]) +
                           " out of bounds for " + shape_string(x.shape()));
    }
    out[i] = in[flat[i]];
  }
  return Tensor::make({flat.size()}, std::move(out), {x},
                      [flat](const Node&, GradOut g, Grads pg) {
                        for (std::size_t i = 0; i < flat.size(); ++i)
                          pg[0][flat[i]] += g[i];
                      });
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
  require_rank(x, 2, "add_rowwise");
  if (bias.rank() != 1 || bias.dim(0) != x.dim(1)) {
    throw DimensionError("add_rowwise: bias " + shape_string(bias.shape()) +
                         " does not match " + shape_string(x.shape()));
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const auto xv = x.data();
  const auto bv = bias.data();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out[r * cols + c] = xv[r * cols + c] + bv[c];
  return Tensor::make({rows, cols}, std::move(out), {x, bias},
                      [rows, cols](const Node&, GradOut g, Grads pg) {
                        if (pg[0])
                          for (std::size_t i = 0; i < g.size(); ++i)
                            pg[0][i] += g[i];
                        if (pg[1])
                          for (std::size_t r = 0; r < rows; ++r)
                            for (std::size_t c = 0; c < cols; ++c)
                              pg[1][c] += g[r * cols + c];
                      });
}

Tensor pairwise_sum(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "pairwise_sum");
  require_rank(b, 2, "pairwise_sum");
  if (a.dim(1) != b.dim(1)) {
    throw DimensionError("pairwise_sum: column mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  const std::size_t ta = a.dim(0), ub = b.dim(0), d = a.dim(1);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(ta * ub * d);
  for (std::size_t t = 0; t < ta; ++t)
    for (std::size_t u = 0; u < ub; ++u)
      for (std::size_t c = 0; c < d; ++c)
        out[(t * ub + u) * d + c] = av[t * d + c] + bv[u * d + c];
  return Tensor::make({ta * ub, d}, std::move(out), {a, b},
                      [ta, ub, d](const Node&, GradOut g, Grads pg) {
                        for (std::size_t t = 0; t < ta; ++t)
                          for (std::size_t u = 0; u < ub; ++u)
                            for (std::size_t c = 0; c < d; ++c) {
                              const double gv = g[(t * ub + u) * d + c];
                              if (pg[0]) pg[0][t * d + c] += gv;
                              if (pg[1]) pg[1][u * d + c] += gv;
                            }
                      });
}

Tensor weighted_rows(const Tensor& x, const Tensor& weights) {
  require_rank(x, 2, "weighted_rows");
  require_rank(weights, 1, "weighted_rows");
  if (weights.dim(0) != x.dim(0)) {
    throw DimensionError("weighted_rows: " + shape_string(weights.shape()) +
                         " weights for " + shape_string(x.shape()));
  }
  const std::size_t n = x.dim(0), d = x.dim(1);
  const auto xv = x.data();
  const auto wv = weights.data();
  std::vector<double> out(d, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < d; ++c) out[c] += wv[k] * xv[k * d + c];
  return Tensor::make({d}, std::move(out), {x, weights},
                      [n, d](const Node& self, GradOut g, Grads pg) {
                        const auto& xv = parent_value(self, 0);
                        const auto& wv = parent_value(self, 1);
                        for (std::size_t k = 0; k < n; ++k)
                          for (std::size_t c = 0; c < d; ++c) {
                            if (pg[0]) pg[0][k * d + c] += wv[k] * g[c];
                            if (pg[1]) pg[1][k] += xv[k * d + c] * g[c];
                          }
                      });
}

}  // namespace tst
