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

#include <span>
#include <string>

#include "minialfred/nnkit/tape.hpp"

namespace minialfred::nn {

struct Dense {
  int weight = -1;
  int bias = -1;

  static Dense create(ParamSet& params, const std::string& name, int in, int out, Rng& rng);
  Var forward(Tape& t, Var x) const;
};

struct Embedding {
  int table = -1;

  static Embedding create(ParamSet& params, const std::string& name, int vocab, int width,
                          Rng& rng);
  Var forward(Tape& t, std::span<const int> ids) const;
};

// Gated recurrent unit:
//   r = sigmoid(x Wr + br + h Ur + cr)
//   z = sigmoid(x Wz + bz + h Uz + cz)
//   n = tanh(x Wn + bn + r * (h Un + cn))
//   h' = n + z * (h - n)
// Gate blocks are laid out [r | z | n] along columns.
struct GruCell {
  int wx = -1;
  int bx = -1;
  int uh = -1;
  int bh = -1;
  int hidden = 0;

  static GruCell create(ParamSet& params, const std::string& name, int in, int hidden, Rng& rng);
  // Input-side gate pre-activations for every row of x at once (rows x 3H).
  Var input_gates(Tape& t, Var x) const;
  // One recurrence step from a 1 x 3H row of input gates.
  Var step(Tape& t, Var gates_row, Var h) const;
};

}  // namespace minialfred::nn
