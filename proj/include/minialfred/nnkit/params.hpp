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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "minialfred/nnkit/tensor.hpp"
#include "minialfred/rng.hpp"

namespace minialfred::nn {

// Named, ordered collection of learnable tensors.
class ParamSet {
 public:
  int add(std::string name, Tensor value);
  int size() const { return static_cast<int>(values_.size()); }
  Tensor& operator[](int i) { return values_.at(static_cast<std::size_t>(i)); }
  const Tensor& operator[](int i) const { return values_.at(static_cast<std::size_t>(i)); }
  const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
  int index_of(const std::string& name) const;
  std::size_t scalar_count() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// Per-parameter gradient buffers, shape-matched to a ParamSet.
struct Gradients {
  std::vector<Tensor> g;

  static Gradients zeros_like(const ParamSet& params);
  void add(const Gradients& other, double scale = 1.0);
  void scale(double s);
};

// Glorot-uniform initialisation.
Tensor glorot_uniform(int rows, int cols, Rng& rng);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  static OptState for_params(const ParamSet& params);
  friend bool operator==(const OptState&, const OptState&) = default;
};

// Bias-corrected Adam update in place.
void adam_step(ParamSet& params, const Gradients& grads, OptState& state, double lr,
               const AdamConfig& config = {});

// lr = base * decay^(step mod period); one step per streamed-episode update.
struct LrSchedule {
  double base = 1e-3;
  double decay = 0.95;
  int period = 10;

  double at(std::int64_t step) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
// Header: magic, version, tensor count, then per tensor name and shape.
// Body: every value as little-endian IEEE-754 binary64, tensors in order.
void save_checkpoint(std::ostream& out, const ParamSet& params);
ParamSet load_checkpoint(std::istream& in);

}  // namespace minialfred::nn
