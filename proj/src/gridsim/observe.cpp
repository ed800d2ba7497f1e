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

#include "minialfred/gridsim/observe.hpp"

#include <algorithm>

#include "minialfred/gridsim/sim.hpp"

namespace minialfred::sim {
namespace {

void or_state_bits(const StateBits& s, double* out) {
  for (int b = 0; b < kNumStateBits; ++b) {
    if (s.get(static_cast<StateBit>(b))) out[b] = 1.0;
  }
}

void encode_cell(const SimState& state, Cell cell, double* out) {
  const Layout& layout = state.layout;
  double* classes = out;
  double* bits = out + kNumClasses;
  double* wall = bits + kNumStateBits;
  double* style = wall + 1;
  if (!in_grid(cell) || layout.tile(cell) == Tile::Wall) *wall = 1.0;
  if (!in_grid(cell)) return;
  std::copy(layout.style.begin(), layout.style.end(), style);
  for (int id : accessible_objects(layout, cell)) {
    const auto& o = layout.objects[id];
    classes[static_cast<int>(o.cls)] = 1.0;
    or_state_bits(o.state, bits);
  }
}

void encode_inventory(const Layout& layout, int id, double* out) {
  const auto& o = layout.objects[id];
  out[static_cast<int>(o.cls)] = 1.0;
  or_state_bits(o.state, out + kNumClasses);
  for (int child : o.contains) encode_inventory(layout, child, out);
}

}  // namespace

Cell window_cell(Cell agent, Heading heading, int depth, int lateral) {
  const Cell f = ahead(Cell{0, 0}, heading);
  const Cell r = ahead(Cell{0, 0}, turn_right(heading));
  return {agent.row + depth * f.row + lateral * r.row, agent.col + depth * f.col + lateral * r.col};
}

FeatureVector observe(const SimState& state, std::span<const int> instruction) {
  FeatureVector v(kFeatureDim, 0.0);
  double* p = v.data();
  for (int depth = 1; depth <= kWindowDepth; ++depth) {
    for (int lateral = -1; lateral <= 1; ++lateral) {
      encode_cell(state, window_cell(state.agent_pos, state.heading, depth, lateral), p);
      p += kCellFeatures;
    }
  }
  p[static_cast<int>(state.heading)] = 1.0;
  p += kHeadingDim;
  if (state.inventory) encode_inventory(state.layout, *state.inventory, p);
  p += kInventoryDim;
  const std::size_t n = std::min<std::size_t>(instruction.size(), kMaxInstructionTokens);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(instruction[i]);
  return v;
}

}  // namespace minialfred::sim
