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

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "minialfred/nnkit/params.hpp"
#include "minialfred/nnkit/tensor.hpp"

namespace minialfred::nn {

// Handle to a node on a Tape.
struct Var {
  int id = -1;
};

// Records a forward computation over 2-D tensors and replays it in reverse
// to obtain gradients. Parameters are referenced, not copied, so the
// ParamSet must outlive the tape and stay unmodified until backward() ends.
class Tape {
 public:
  explicit Tape(const ParamSet* params = nullptr) : params_(params) {}

  Var constant(Tensor value);
  // Leaf bound to params[index]; repeated calls return the same node.
  Var param(int index);

  const Tensor& value(Var v) const;
  // Zero-sized until backward() has reached the node.
  const Tensor& grad(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  // a (m x k) * b (k x n). Zero entries of `a` are skipped.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  // Adds a 1 x n row to every row of a (m x n).
  Var add_row(Var a, Var row);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, int start, int width);
  Var row(Var a, int r);
  Var stack_rows(std::span<const Var> rows);
  // Rows of `table` selected by `ids`.
  Var gather_rows(Var table, std::span<const int> ids);
  // 1 x n mean over rows; a zero-row input yields zeros.
  Var mean_rows(Var a);
  Var sum(Var a);
  // Scalar sum_i w_i * -log softmax(logits_i)[target_i]; rows with w_i == 0
  // are skipped and may carry any target.
  Var softmax_cross_entropy(Var logits, std::span<const int> targets,
                            std::span<const double> weights);
  // Scalar sum_i w_i * ||a_i - target_i||^2.
  Var squared_error(Var a, const Tensor& target, std::span<const double> weights);

  // Seeds d(out)/d(out) = 1 for a 1 x 1 output.
  void backward(Var out);
  void backward(Var out, const Tensor& seed);
  // Adds accumulated parameter gradients into `grads`.
  void accumulate_param_grads(Gradients& grads) const;

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    int param_index = -1;
    bool needs_grad = false;
    std::function<void(Tape&, int)> backward;
  };

  const Tensor& val(int id) const;
  Tensor& grad_buf(int id);
  Var push(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backward);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  void check(Var v) const;

  const ParamSet* params_;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
  bool backward_done_ = false;
};

double softmax_probability(std::span<const double> logits, int index);
std::vector<double> softmax(std::span<const double> logits);

// Maximum over parameter entries of |analytic - numeric| / max(|analytic|,
// |numeric|, floor), using central differences with step h. `loss` must
// build a scalar on the given tape from the current parameter values.
struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};
GradCheckResult gradient_check(ParamSet& params, const std::function<Var(Tape&)>& loss,
                               double h = 1e-5, double floor = 1e-6);

}  // namespace minialfred::nn
