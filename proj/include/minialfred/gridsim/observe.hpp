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
#include <vector>

#include "minialfred/gridsim/types.hpp"

namespace minialfred::sim {

// Per window cell: class multi-hot, OR of visible state bits, wall flag, style.
inline constexpr int kCellFeatures = kNumClasses + kNumStateBits + 1 + kStyleDim;
inline constexpr int kWindowDepth = 3;
inline constexpr int kWindowWidth = 3;
inline constexpr int kWindowDim = kWindowDepth * kWindowWidth * kCellFeatures;
inline constexpr int kHeadingDim = 4;
// Carried object classes (multi-hot, includes container contents) and their state bits.
inline constexpr int kInventoryDim = kNumClasses + kNumStateBits;
inline constexpr int kDenseDim = kWindowDim + kHeadingDim + kInventoryDim;
inline constexpr int kMaxInstructionTokens = 12;
inline constexpr int kFeatureDim = kDenseDim + kMaxInstructionTokens;
inline constexpr int kPadToken = 0;

using FeatureVector = std::vector<double>;

// Grid cell seen at window slot (depth, lateral) for a given pose. depth runs
// 1..3 ahead of the agent; lateral is -1 (left), 0, +1 (right).
Cell window_cell(Cell agent, Heading heading, int depth, int lateral);

// Layout of the returned vector:
//   [window 3x3 x kCellFeatures][heading one-hot][inventory][token ids]
// Window slots are ordered depth-major (nearest row first), left to right.
// Token ids are copied as numbers, padded with kPadToken; embedding happens
// in the policy.
FeatureVector observe(const SimState& state, std::span<const int> instruction);

}  // namespace minialfred::sim
