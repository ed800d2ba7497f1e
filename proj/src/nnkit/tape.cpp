// Copyright 2026 The MiniALFRED Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "minialfred/nnkit/tape.hpp"

#include <algorithm>
#include <cmath>

namespace minialfred::nn {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string shape_string(const Tensor& t) {
  return "[" + std::to_string(t.rows) + " x " + std::to_string(t.cols) + "]";
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& x : p) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : p) x /= z;
  return p;
}

double softmax_probability(std::span<const double> logits, int index) {
  return softmax(logits).at(static_cast<std::size_t>(index));
}

const Tensor& Tape::val(int id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.owned;
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    const Tensor& v = val(id);
    n.grad = Tensor(v.rows, v.cols);
  }
  return n.grad;
}

void Tape::check(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw ShapeError("variable not on this tape");
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return val(v.id);
}

const Tensor& Tape::grad(Var v) const {
  check(v);
  return nodes_[v.id].grad;
}

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backward) {
  Node n;
  n.owned = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::param(int index) {
  if (!params_ || index < 0 || index >= params_->size()) throw ShapeError("parameter index out of range");
  if (param_nodes_.empty()) param_nodes_.assign(static_cast<std::size_t>(params_->size()), -1);
  if (param_nodes_[index] >= 0) return {param_nodes_[index]};
  Node n;
  n.ref = &(*params_)[index];
  n.param_index = index;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  param_nodes_[index] = static_cast<int>(nodes_.size()) - 1;
  return {param_nodes_[index]};
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  if (A.cols != B.rows) {
    throw ShapeError("matmul shape mismatch " + shape_string(A) + " * " + shape_string(B));
  }
  Tensor C(A.rows, B.cols);
  const int n = B.cols;
  for (int i = 0; i < A.rows; ++i) {
    double* c = C.row_ptr(i);
    const double* arow = A.row_ptr(i);
    for (int p = 0; p < A.cols; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = B.row_ptr(p);
      for (int j = 0; j < n; ++j) c[j] += av * brow[j];
    }
  }
  const bool ng = needs(a) || needs(b);
  return push(std::move(C), ng, [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& A = t.val(a.id);
    const Tensor& B = t.val(b.id);
    const int n = B.cols;
    if (t.needs(a)) {
      Tensor& dA = t.grad_buf(a.id);
      for (int i = 0; i < A.rows; ++i) {
        const double* g = G.row_ptr(i);
        double* da = dA.row_ptr(i);
        for (int p = 0; p < A.cols; ++p) {
          const double* brow = B.row_ptr(p);
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += g[j] * brow[j];
          da[p] += s;
        }
      }
    }
    if (t.needs(b)) {
      Tensor& dB = t.grad_buf(b.id);
      for (int i = 0; i < A.rows; ++i) {
        const double* g = G.row_ptr(i);
        const double* arow = A.row_ptr(i);
        for (int p = 0; p < A.cols; ++p) {
          const double av = arow[p];
          if (av == 0.0) continue;
          double* db = dB.row_ptr(p);
          for (int j = 0; j < n; ++j) db[j] += av * g[j];
        }
      }
    }
  });
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.same_shape(B), "add shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    for (Var v : {a, b}) {
      if (!t.needs(v)) continue;
      Tensor& d = t.grad_buf(v.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.same_shape(B), "sub shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] -= B.data[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      Tensor& d = t.grad_buf(a.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i];
    }
    if (t.needs(b)) {
      Tensor& d = t.grad_buf(b.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] -= G.data[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.same_shape(B), "mul shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      const Tensor& B = t.val(b.id);
      Tensor& d = t.grad_buf(a.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i] * B.data[i];
    }
    if (t.needs(b)) {
      const Tensor& A = t.val(a.id);
      Tensor& d = t.grad_buf(b.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i] * A.data[i];
    }
  });
}

Var Tape::scale(Var a, double s) {
  check(a);
  Tensor C = val(a.id);
  for (double& x : C.data) x *= s;
  return push(std::move(C), needs(a), [a, s](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.grad_buf(a.id);
    for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += s * G.data[i];
  });
}

Var Tape::add_row(Var a, Var r) {
  check(a);
  check(r);
  const Tensor& A = val(a.id);
  const Tensor& R = val(r.id);
  require(R.rows == 1 && R.cols == A.cols, "add_row expects a 1 x n row");
  Tensor C = A;
  for (int i = 0; i < C.rows; ++i) {
    double* c = C.row_ptr(i);
    for (int j = 0; j < C.cols; ++j) c[j] += R.data[j];
  }
  return push(std::move(C), needs(a) || needs(r), [a, r](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      Tensor& d = t.grad_buf(a.id);
      for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i];
    }
    if (t.needs(r)) {
      Tensor& d = t.grad_buf(r.id);
      for (int i = 0; i < G.rows; ++i) {
        const double* g = G.row_ptr(i);
        for (int j = 0; j < G.cols; ++j) d.data[j] += g[j];
      }
    }
  });
}

Var Tape::sigmoid(Var a) {
  check(a);
  Tensor C = val(a.id);
  for (double& x : C.data) x = sigmoid_scalar(x);
  return push(std::move(C), needs(a), [a](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& Y = t.val(self);
    Tensor& d = t.grad_buf(a.id);
    for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i] * Y.data[i] * (1.0 - Y.data[i]);
  });
}

Var Tape::tanh(Var a) {
  check(a);
  Tensor C = val(a.id);
  for (double& x : C.data) x = std::tanh(x);
  return push(std::move(C), needs(a), [a](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    const Tensor& Y = t.val(self);
    Tensor& d = t.grad_buf(a.id);
    for (std::size_t i = 0; i < G.size(); ++i) d.data[i] += G.data[i] * (1.0 - Y.data[i] * Y.data[i]);
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols needs at least one input");
  int rows = -1;
  int cols = 0;
  bool ng = false;
  for (Var p : parts) {
    check(p);
    const Tensor& P = val(p.id);
    if (rows < 0) rows = P.rows;
    require(P.rows == rows, "concat_cols row mismatch");
    cols += P.cols;
    ng = ng || needs(p);
  }
  Tensor C(rows, cols);
  int offset = 0;
  for (Var p : parts) {
    const Tensor& P = val(p.id);
    for (int i = 0; i < rows; ++i) std::copy_n(P.row_ptr(i), P.cols, C.row_ptr(i) + offset);
    offset += P.cols;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(C), ng, [inputs](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    int offset = 0;
    for (Var p : inputs) {
      const int w = t.val(p.id).cols;
      if (t.needs(p)) {
        Tensor& d = t.grad_buf(p.id);
        for (int i = 0; i < G.rows; ++i) {
          const double* g = G.row_ptr(i) + offset;
          double* dp = d.row_ptr(i);
          for (int j = 0; j < w; ++j) dp[j] += g[j];
        }
      }
      offset += w;
    }
  });
}

Var Tape::slice_cols(Var a, int start, int width) {
  check(a);
  const Tensor& A = val(a.id);
  require(start >= 0 && width >= 0 && start + width <= A.cols, "slice_cols out of range");
  Tensor C(A.rows, width);
  for (int i = 0; i < A.rows; ++i) std::copy_n(A.row_ptr(i) + start, width, C.row_ptr(i));
  return push(std::move(C), needs(a), [a, start, width](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.grad_buf(a.id);
    for (int i = 0; i < G.rows; ++i) {
      const double* g = G.row_ptr(i);
      double* dp = d.row_ptr(i) + start;
      for (int j = 0; j < width; ++j) dp[j] += g[j];
    }
  });
}

Var Tape::row(Var a, int r) {
  check(a);
  const Tensor& A = val(a.id);
  require(r >= 0 && r < A.rows, "row index out of range");
  Tensor C(1, A.cols);
  std::copy_n(A.row_ptr(r), A.cols, C.data.data());
  return push(std::move(C), needs(a), [a, r](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.grad_buf(a.id);
    double* dp = d.row_ptr(r);
    for (int j = 0; j < G.cols; ++j) dp[j] += G.data[j];
  });
}

Var Tape::stack_rows(std::span<const Var> rows) {
  require(!rows.empty(), "stack_rows needs at least one input");
  int cols = -1;
  int total = 0;
  bool ng = false;
  for (Var r : rows) {
    check(r);
    const Tensor& R = val(r.id);
    if (cols < 0) cols = R.cols;
    require(R.cols == cols, "stack_rows column mismatch");
    total += R.rows;
    ng = ng || needs(r);
  }
  Tensor C(total, cols);
  int offset = 0;
  for (Var r : rows) {
    const Tensor& R = val(r.id);
    std::copy(R.data.begin(), R.data.end(), C.row_ptr(offset));
    offset += R.rows;
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return push(std::move(C), ng, [inputs](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    int offset = 0;
    for (Var r : inputs) {
      const Tensor& R = t.val(r.id);
      if (t.needs(r)) {
        Tensor& d = t.grad_buf(r.id);
        const double* g = G.row_ptr(offset);
        for (std::size_t i = 0; i < R.size(); ++i) d.data[i] += g[i];
      }
      offset += R.rows;
    }
  });
}

Var Tape::gather_rows(Var table, std::span<const int> ids) {
  check(table);
  const Tensor& T = val(table.id);
  Tensor C(static_cast<int>(ids.size()), T.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < T.rows, "gather_rows index out of range");
    std::copy_n(T.row_ptr(ids[i]), T.cols, C.row_ptr(static_cast<int>(i)));
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return push(std::move(C), needs(table), [table, idx](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.grad_buf(table.id);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double* g = G.row_ptr(static_cast<int>(i));
      double* dp = d.row_ptr(idx[i]);
      for (int j = 0; j < G.cols; ++j) dp[j] += g[j];
    }
  });
}

Var Tape::mean_rows(Var a) {
  check(a);
  const Tensor& A = val(a.id);
  Tensor C(1, A.cols);
  if (A.rows > 0) {
    for (int i = 0; i < A.rows; ++i) {
      const double* r = A.row_ptr(i);
      for (int j = 0; j < A.cols; ++j) C.data[j] += r[j];
    }
    for (double& x : C.data) x /= A.rows;
  }
  return push(std::move(C), needs(a), [a](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.grad_buf(a.id);
    if (d.rows == 0) return;
    const double inv = 1.0 / d.rows;
    for (int i = 0; i < d.rows; ++i) {
      double* dp = d.row_ptr(i);
      for (int j = 0; j < d.cols; ++j) dp[j] += G.data[j] * inv;
    }
  });
}

Var Tape::sum(Var a) {
  check(a);
  const Tensor& A = val(a.id);
  double s = 0.0;
  for (double x : A.data) s += x;
  return push(Tensor(1, 1, s), needs(a), [a](Tape& t, int self) {
    const double g = t.nodes_[self].grad.data[0];
    Tensor& d = t.grad_buf(a.id);
    for (double& x : d.data) x += g;
  });
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> targets,
                                std::span<const double> weights) {
  check(logits);
  const Tensor& Z = val(logits.id);
  require(targets.size() == static_cast<std::size_t>(Z.rows) && weights.size() == targets.size(),
          "softmax_cross_entropy label count mismatch");
  Tensor probs(Z.rows, Z.cols);
  double loss = 0.0;
  for (int i = 0; i < Z.rows; ++i) {
    if (weights[i] == 0.0) continue;
    require(targets[i] >= 0 && targets[i] < Z.cols, "softmax_cross_entropy target out of range");
    const auto p = softmax(std::span<const double>(Z.row_ptr(i), Z.cols));
    std::copy(p.begin(), p.end(), probs.row_ptr(i));
    // -log p_t = (max - z_t) + log1p(sum over non-max entries of exp(z_j - max)),
    // which keeps full precision when the target dominates.
    const double* z = Z.row_ptr(i);
    const auto top = std::max_element(z, z + Z.cols) - z;
    double rest = 0.0;
    for (int j = 0; j < Z.cols; ++j) {
      if (j != top) rest += std::exp(z[j] - z[top]);
    }
    loss += weights[i] * ((z[top] - z[targets[i]]) + std::log1p(rest));
  }
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return push(Tensor(1, 1, loss), needs(logits),
              [logits, tg, w, probs = std::move(probs)](Tape& t, int self) {
                const double g = t.nodes_[self].grad.data[0];
                Tensor& d = t.grad_buf(logits.id);
                for (int i = 0; i < d.rows; ++i) {
                  if (w[i] == 0.0) continue;
                  const double* p = probs.row_ptr(i);
                  double* dp = d.row_ptr(i);
                  const double s = g * w[i];
                  for (int j = 0; j < d.cols; ++j) dp[j] += s * p[j];
                  dp[tg[i]] -= s;
                }
              });
}

Var Tape::squared_error(Var a, const Tensor& target, std::span<const double> weights) {
  check(a);
  const Tensor& A = val(a.id);
  require(A.same_shape(target), "squared_error shape mismatch");
  require(weights.size() == static_cast<std::size_t>(A.rows), "squared_error weight count mismatch");
  Tensor diff(A.rows, A.cols);
  double loss = 0.0;
  for (int i = 0; i < A.rows; ++i) {
    if (weights[i] == 0.0) continue;
    for (int j = 0; j < A.cols; ++j) {
      const double e = A(i, j) - target(i, j);
      diff(i, j) = e;
      loss += weights[i] * e * e;
    }
  }
  std::vector<double> w(weights.begin(), weights.end());
  return push(Tensor(1, 1, loss), needs(a), [a, w, diff = std::move(diff)](Tape& t, int self) {
    const double g = t.nodes_[self].grad.data[0];
    Tensor& d = t.grad_buf(a.id);
    for (int i = 0; i < d.rows; ++i) {
      if (w[i] == 0.0) continue;
      const double s = 2.0 * g * w[i];
      const double* e = diff.row_ptr(i);
      double* dp = d.row_ptr(i);
      for (int j = 0; j < d.cols; ++j) dp[j] += s * e[j];
    }
  });
}

void Tape::backward(Var out) {
  check(out);
  require(val(out.id).size() == 1, "backward(out) needs a scalar output");
  backward(out, Tensor(1, 1, 1.0));
}

void Tape::backward(Var out, const Tensor& seed) {
  check(out);
  if (backward_done_) throw std::logic_error("backward already ran on this tape");
  require(seed.same_shape(val(out.id)), "seed gradient shape mismatch");
  backward_done_ = true;
  grad_buf(out.id).data = seed.data;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, i);
  }
}

void Tape::accumulate_param_grads(Gradients& grads) const {
  if (!params_) return;
  if (grads.g.size() != static_cast<std::size_t>(params_->size())) {
    throw ShapeError("gradient buffer does not match parameter set");
  }
  for (std::size_t p = 0; p < param_nodes_.size(); ++p) {
    const int id = param_nodes_[p];
    if (id < 0) continue;
    const Tensor& g = nodes_[id].grad;
    if (g.size() == 0) continue;
    Tensor& dst = grads.g[p];
    for (std::size_t i = 0; i < g.size(); ++i) dst.data[i] += g.data[i];
  }
}

GradCheckResult gradient_check(ParamSet& params, const std::function<Var(Tape&)>& loss,
                               double h, double floor) {
  Gradients analytic = Gradients::zeros_like(params);
  {
    Tape t(&params);
    const Var l = loss(t);
    t.backward(l);
    t.accumulate_param_grads(analytic);
  }
  auto eval = [&] {
    Tape t(&params);
    return t.value(loss(t)).data[0];
  };
  GradCheckResult r;
  for (int p = 0; p < params.size(); ++p) {
    Tensor& w = params[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w.data[i];
      w.data[i] = orig + h;
      const double up = eval();
      w.data[i] = orig - h;
      const double down = eval();
      w.data[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.g[p].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      r.max_relative_error = std::max(r.max_relative_error, std::abs(a - numeric) / denom);
      ++r.entries_checked;
    }
  }
  return r;
}

}  // namespace minialfred::nn
