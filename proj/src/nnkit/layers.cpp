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

#include "minialfred/nnkit/layers.hpp"

#include <array>

namespace minialfred::nn {

Dense Dense::create(ParamSet& params, const std::string& name, int in, int out, Rng& rng) {
  Dense d;
  d.weight = params.add(name + ".w", glorot_uniform(in, out, rng));
  d.bias = params.add(name + ".b", Tensor(1, out));
  return d;
}

Var Dense::forward(Tape& t, Var x) const {
  return t.add_row(t.matmul(x, t.param(weight)), t.param(bias));
}

Embedding Embedding::create(ParamSet& params, const std::string& name, int vocab, int width,
                            Rng& rng) {
  Embedding e;
  Tensor table(vocab, width);
  for (double& x : table.data) x = 0.1 * rng.normal();
  e.table = params.add(name + ".table", std::move(table));
  return e;
}

Var Embedding::forward(Tape& t, std::span<const int> ids) const {
  return t.gather_rows(t.param(table), ids);
}

GruCell GruCell::create(ParamSet& params, const std::string& name, int in, int hidden, Rng& rng) {
  GruCell g;
  g.hidden = hidden;
  g.wx = params.add(name + ".wx", glorot_uniform(in, 3 * hidden, rng));
  g.bx = params.add(name + ".bx", Tensor(1, 3 * hidden));
  g.uh = params.add(name + ".uh", glorot_uniform(hidden, 3 * hidden, rng));
  g.bh = params.add(name + ".bh", Tensor(1, 3 * hidden));
  return g;
}

Var GruCell::input_gates(Tape& t, Var x) const {
  return t.add_row(t.matmul(x, t.param(wx)), t.param(bx));
}

Var GruCell::step(Tape& t, Var gates_row, Var h) const {
  const int H = hidden;
  const Var hg = t.add_row(t.matmul(h, t.param(uh)), t.param(bh));
  const Var r = t.sigmoid(t.add(t.slice_cols(gates_row, 0, H), t.slice_cols(hg, 0, H)));
  const Var z = t.sigmoid(t.add(t.slice_cols(gates_row, H, H), t.slice_cols(hg, H, H)));
  const Var n = t.tanh(t.add(t.slice_cols(gates_row, 2 * H, H), t.mul(r, t.slice_cols(hg, 2 * H, H))));
  return t.add(n, t.mul(z, t.sub(h, n)));
}

}  // namespace minialfred::nn
