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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "minialfred/clmethods.hpp"

namespace minialfred::cl {
namespace {

constexpr std::string_view kMethodNames[] = {"Finetune", "ER",   "EWCpp",     "DERpp",
                                             "CAMA",     "CAMA_fixed", "Joint"};

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + why);
}

double clamp_open_unit(double p) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

double mean(const std::deque<double>& q) {
  double s = 0.0;
  for (double v : q) s += v;
  return s / static_cast<double>(q.size());
}

template <class QueueAt>
std::vector<double> gamma_for(int n, double alpha, QueueAt queue_at) {
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  const double floor = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const std::deque<double>& q = queue_at(i);
    if (q.empty()) continue;
    g[static_cast<std::size_t>(i)] = alpha * std::clamp(mean(q) - floor, 0.0, 1.0);
  }
  return g;
}

}  // namespace

std::string_view name(Method m) { return kMethodNames[static_cast<int>(m)]; }

std::optional<Method> parse_method(std::string_view s) {
  for (Method m : all_methods()) {
    if (name(m) == s) return m;
  }
  if (s == "EWC++") return Method::EWCpp;
  if (s == "DER++") return Method::DERpp;
  return std::nullopt;
}

std::vector<Method> all_methods() {
  return {Method::Finetune, Method::ER,   Method::EWCpp,     Method::DERpp,
          Method::CAMA,     Method::CAMA_fixed, Method::Joint};
}

bool uses_memory(Method m) {
  return m == Method::ER || m == Method::DERpp || m == Method::CAMA || m == Method::CAMA_fixed;
}

bool uses_distillation(Method m) {
  return m == Method::DERpp || m == Method::CAMA || m == Method::CAMA_fixed;
}

void MethodConfig::validate() const {
  require(alpha >= 0.0 && std::isfinite(alpha), "alpha", "must be finite and non-negative");
  require(alpha_a > 0.0 && alpha_a < 1.0, "alpha_a", "must lie in (0, 1)");
  require(alpha_c > 0.0 && alpha_c < 1.0, "alpha_c", "must lie in (0, 1)");
  require(queue_n >= 1, "queue_n", "must be at least 1");
  require(memory_size >= 1, "memory_size", "must be at least 1");
  require(ewc_lambda >= 0.0, "ewc_lambda", "must be non-negative");
  require(fisher_decay >= 0.0 && fisher_decay <= 1.0, "fisher_decay", "must lie in [0, 1]");
  require(anchor_every >= 1, "anchor_every", "must be at least 1");
  require(stream_batch >= 1, "stream_batch", "must be at least 1");
  require(memory_batch >= 0, "memory_batch", "must be non-negative");
  require(joint_epochs >= 1, "joint_epochs", "must be at least 1");
}

void check_entry(const MemoryEntry& e) {
  if (!e.demo) throw nn::ShapeError("memory entry without a demonstration");
  const auto T = static_cast<int>(e.demo->steps.size());
  const auto K = static_cast<int>(e.demo->interaction_count());
  if (e.action_logits.rows != T || e.action_logits.cols != sim::kNumActions) {
    throw nn::ShapeError("action logits " + nn::shape_string(e.action_logits) + " for " +
                         std::to_string(T) + " steps");
  }
  if (e.class_logits.rows != K || (K > 0 && e.class_logits.cols != sim::kNumClasses)) {
    throw nn::ShapeError("class logits " + nn::shape_string(e.class_logits) + " for " +
                         std::to_string(K) + " interaction steps");
  }
  for (double v : e.action_logits.data) {
    if (!std::isfinite(v)) throw nn::ShapeError("non-finite stored action logit");
  }
  for (double v : e.class_logits.data) {
    if (!std::isfinite(v)) throw nn::ShapeError("non-finite stored class logit");
  }
}

EpisodicMemory::EpisodicMemory(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("memory capacity must be at least 1");
  entries_.reserve(static_cast<std::size_t>(capacity));
}

std::vector<std::size_t> EpisodicMemory::sample(std::size_t k, Rng& rng) const {
  std::vector<std::size_t> idx(entries_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  k = std::min(k, idx.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  idx.resize(k);
  return idx;
}

std::optional<std::size_t> reservoir_insert(EpisodicMemory& memory, MemoryEntry entry, Rng& rng) {
  check_entry(entry);
  ++memory.seen_;
  if (memory.entries_.size() < static_cast<std::size_t>(memory.capacity_)) {
    memory.entries_.push_back(std::move(entry));
    return memory.entries_.size() - 1;
  }
  const auto j = rng.uniform_index(static_cast<std::size_t>(memory.seen_));
  if (j >= static_cast<std::size_t>(memory.capacity_)) return std::nullopt;
  memory.entries_[j] = std::move(entry);
  return j;
}

ConfidenceQueues::ConfidenceQueues(int capacity, int actions, int classes)
    : capacity_(capacity),
      actions_(static_cast<std::size_t>(actions)),
      classes_(static_cast<std::size_t>(classes)) {
  if (capacity < 1) throw std::invalid_argument("queue capacity must be at least 1");
}

void ConfidenceQueues::push(std::deque<double>& q, int capacity, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("confidence " + std::to_string(value) + " outside [0, 1]");
  }
  q.push_back(value);
  while (q.size() > static_cast<std::size_t>(capacity)) q.pop_front();
}

void ConfidenceQueues::push_action(int action, double confidence) {
  push(actions_.at(static_cast<std::size_t>(action)), capacity_, confidence);
}

void ConfidenceQueues::push_class(int cls, double confidence) {
  push(classes_.at(static_cast<std::size_t>(cls)), capacity_, confidence);
}

void push_confidences(ConfidenceQueues& queues, const nn::Tensor& action_logits,
                      const nn::Tensor& class_logits, const expert::Demonstration& demo) {
  const auto T = static_cast<int>(demo.steps.size());
  if (action_logits.rows != T || class_logits.rows != T) {
    throw nn::ShapeError("logit rows do not match the episode length");
  }
  for (int t = 0; t < T; ++t) {
    const auto& s = demo.steps[static_cast<std::size_t>(t)];
    const int a = static_cast<int>(s.action);
    const std::span<const double> za(action_logits.row_ptr(t), action_logits.cols);
    queues.push_action(a, clamp_open_unit(nn::softmax_probability(za, a)));
    if (sim::is_interaction(s.action) && s.target_class) {
      const int c = static_cast<int>(*s.target_class);
      const std::span<const double> zc(class_logits.row_ptr(t), class_logits.cols);
      queues.push_class(c, clamp_open_unit(nn::softmax_probability(zc, c)));
    }
  }
}

Gamma compute_gamma(const ConfidenceQueues& queues, double alpha_a, double alpha_c) {
  auto action = [&](int i) -> const std::deque<double>& { return queues.action_queue(i); };
  auto cls = [&](int i) -> const std::deque<double>& { return queues.class_queue(i); };
  return {gamma_for(queues.action_count(), alpha_a, action),
          gamma_for(queues.class_count(), alpha_c, cls)};
}

Gamma constant_gamma(double alpha_a, double alpha_c, int actions, int classes) {
  return {std::vector<double>(static_cast<std::size_t>(actions), alpha_a),
          std::vector<double>(static_cast<std::size_t>(classes), alpha_c)};
}

std::vector<double> update_logits(std::span<const double> old_logits,
                                  std::span<const double> current, std::span<const double> gamma,
                                  GammaOrientation orientation) {
  if (old_logits.size() != current.size() || gamma.size() != current.size()) {
    throw nn::ShapeError("update_logits: lengths " + std::to_string(old_logits.size()) + ", " +
                         std::to_string(current.size()) + ", " + std::to_string(gamma.size()));
  }
  std::vector<double> out(current.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = gamma[i];
    const double mixed = orientation == GammaOrientation::CurrentWeighted
                             ? (1.0 - g) * old_logits[i] + g * current[i]
                             : g * old_logits[i] + (1.0 - g) * current[i];
    // Rounding can push a convex combination one ulp outside its endpoints.
    if (g >= 0.0 && g <= 1.0) {
      out[i] = std::clamp(mixed, std::min(old_logits[i], current[i]),
                          std::max(old_logits[i], current[i]));
    } else {
      out[i] = mixed;
    }
  }
  return out;
}

HeadSummary summarize_head(std::span<const double> values) {
  if (values.empty()) return {};
  HeadSummary s{values[0], 0.0, values[0]};
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    s.mean += v;
  }
  s.mean /= static_cast<double>(values.size());
  return s;
}

}  // namespace minialfred::cl
