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

#include "minialfred/nnkit/params.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace minialfred::nn {
namespace {

constexpr std::array<char, 8> kMagic = {'M', 'A', 'L', 'F', 'P', 'A', 'R', 'M'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

int ParamSet::add(std::string name, Tensor value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return static_cast<int>(values_.size()) - 1;
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw std::out_of_range("no parameter named " + name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Gradients Gradients::zeros_like(const ParamSet& params) {
  Gradients g;
  for (int i = 0; i < params.size(); ++i) g.g.emplace_back(params[i].rows, params[i].cols);
  return g;
}

void Gradients::add(const Gradients& other, double s) {
  if (other.g.size() != g.size()) throw ShapeError("gradient set size mismatch");
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!g[p].same_shape(other.g[p])) throw ShapeError("gradient shape mismatch");
    for (std::size_t i = 0; i < g[p].size(); ++i) g[p].data[i] += s * other.g[p].data[i];
  }
}

void Gradients::scale(double s) {
  for (auto& t : g) {
    for (double& x : t.data) x *= s;
  }
}

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& x : t.data) x = rng.uniform(-limit, limit);
  return t;
}

OptState OptState::for_params(const ParamSet& params) {
  OptState s;
  for (int i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params[i].rows, params[i].cols);
    s.v.emplace_back(params[i].rows, params[i].cols);
  }
  return s;
}

void adam_step(ParamSet& params, const Gradients& grads, OptState& state, double lr,
               const AdamConfig& c) {
  if (grads.g.size() != static_cast<std::size_t>(params.size()) ||
      state.m.size() != grads.g.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (int p = 0; p < params.size(); ++p) {
    Tensor& w = params[p];
    const Tensor& g = grads.g[p];
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    if (!w.same_shape(g) || !w.same_shape(m)) throw ShapeError("adam_step shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.data[i] = c.beta1 * m.data[i] + (1.0 - c.beta1) * g.data[i];
      v.data[i] = c.beta2 * v.data[i] + (1.0 - c.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      w.data[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

double LrSchedule::at(std::int64_t step) const {
  if (step < 0) throw std::invalid_argument("learning-rate step must be non-negative");
  return base * std::pow(decay, static_cast<double>(step % period));
}

void save_checkpoint(std::ostream& out, const ParamSet& params) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, kCheckpointVersion);
  put_u64(out, static_cast<std::uint64_t>(params.size()));
  for (int i = 0; i < params.size(); ++i) {
    const auto& name = params.name(i);
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, static_cast<std::uint64_t>(params[i].rows));
    put_u64(out, static_cast<std::uint64_t>(params[i].cols));
  }
  for (int i = 0; i < params.size(); ++i) {
    for (double x : params[i].data) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      put_u64(out, bits);
    }
  }
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

ParamSet load_checkpoint(std::istream& in) {
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a parameter checkpoint");
  }
  const auto version = get_u64(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get_u64(in);
  if (count > (1u << 20)) throw std::runtime_error("implausible tensor count in checkpoint");
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> shapes;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get_u64(in);
    if (len > 4096) throw std::runtime_error("implausible name length in checkpoint");
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) {
      throw std::runtime_error("truncated checkpoint");
    }
    const auto rows = get_u64(in);
    const auto cols = get_u64(in);
    if (rows > (1u << 24) || cols > (1u << 24)) throw std::runtime_error("implausible tensor shape");
    names.push_back(std::move(name));
    shapes.emplace_back(static_cast<int>(rows), static_cast<int>(cols));
  }
  ParamSet params;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Tensor t(shapes[i].first, shapes[i].second);
    for (double& x : t.data) {
      const std::uint64_t bits = get_u64(in);
      std::memcpy(&x, &bits, sizeof x);
    }
    params.add(names[i], std::move(t));
  }
  return params;
}

}  // namespace minialfred::nn
