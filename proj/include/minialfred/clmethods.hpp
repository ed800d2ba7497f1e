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
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minialfred/expert.hpp"
#include "minialfred/nnkit.hpp"
#include "minialfred/policy.hpp"
#include "minialfred/rng.hpp"
#include "minialfred/streamgen.hpp"

namespace minialfred::cl {

enum class Method : std::uint8_t { Finetune, ER, EWCpp, DERpp, CAMA, CAMA_fixed, Joint };
std::string_view name(Method m);
std::optional<Method> parse_method(std::string_view s);
std::vector<Method> all_methods();

// Which side of the mix gamma weights. CurrentWeighted is
// new = (1 - g) * old + g * current; OldWeighted swaps the roles.
enum class GammaOrientation : std::uint8_t { CurrentWeighted, OldWeighted };

struct MethodConfig {
  Method method = Method::CAMA;
  double alpha = 0.5;  // distillation weight, both heads
  double alpha_a = 0.99;
  double alpha_c = 0.99;
  int queue_n = 50;
  int memory_size = 100;
  double ewc_lambda = 10.0;
  double fisher_decay = 0.9;
  int anchor_every = 100;
  int stream_batch = 4;
  int memory_batch = 4;
  int joint_epochs = 10;
  GammaOrientation orientation = GammaOrientation::CurrentWeighted;
  policy::LossWeights loss_weights;
  policy::PolicyConfig policy;
  nn::LrSchedule lr;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

bool uses_memory(Method m);
bool uses_distillation(Method m);

// One episode held in memory with the logits it is distilled towards.
struct MemoryEntry {
  std::shared_ptr<const expert::Demonstration> demo;
  nn::Tensor action_logits;  // T x |A|
  nn::Tensor class_logits;   // (interaction steps) x |C|
  std::size_t inserted_at = 0;
};

// Throws nn::ShapeError unless the logits match the episode.
void check_entry(const MemoryEntry& entry);

class EpisodicMemory {
 public:
  explicit EpisodicMemory(int capacity);

  int capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Number of reservoir insertions attempted so far.
  std::uint64_t seen() const { return seen_; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  MemoryEntry& at(std::size_t slot) { return entries_.at(slot); }

  // min(k, size) distinct slots, uniformly at random.
  std::vector<std::size_t> sample(std::size_t k, Rng& rng) const;

 private:
  friend std::optional<std::size_t> reservoir_insert(EpisodicMemory&, MemoryEntry, Rng&);
  int capacity_;
  std::uint64_t seen_ = 0;
  std::vector<MemoryEntry> entries_;
};

// Algorithm R. Returns the slot written, or nullopt when the item is
// discarded. Throws nn::ShapeError on an inconsistent entry.
std::optional<std::size_t> reservoir_insert(EpisodicMemory& memory, MemoryEntry entry, Rng& rng);

// Fixed-capacity FIFO of ground-truth confidences per action and per class.
class ConfidenceQueues {
 public:
  explicit ConfidenceQueues(int capacity, int actions = sim::kNumActions,
                            int classes = sim::kNumClasses);

  int capacity() const { return capacity_; }
  void push_action(int action, double confidence);
  void push_class(int cls, double confidence);
  const std::deque<double>& action_queue(int action) const { return actions_.at(action); }
  const std::deque<double>& class_queue(int cls) const { return classes_.at(cls); }
  int action_count() const { return static_cast<int>(actions_.size()); }
  int class_count() const { return static_cast<int>(classes_.size()); }

 private:
  static void push(std::deque<double>& q, int capacity, double value);
  int capacity_;
  std::vector<std::deque<double>> actions_;
  std::vector<std::deque<double>> classes_;
};

// Pushes softmax(z_a)[gt action] for every step and softmax(z_c)[gt class]
// for every interaction step. Logits are T x |A| and T x |C|. Confidences
// are kept strictly inside (0, 1).
void push_confidences(ConfidenceQueues& queues, const nn::Tensor& action_logits,
                      const nn::Tensor& class_logits, const expert::Demonstration& demo);

struct Gamma {
  std::vector<double> action;
  std::vector<double> cls;
};

// gamma_i = alpha * clip(mean(Q_i) - 1/n, 0, 1); an empty queue gives 0.
Gamma compute_gamma(const ConfidenceQueues& queues, double alpha_a, double alpha_c);
Gamma constant_gamma(double alpha_a, double alpha_c, int actions = sim::kNumActions,
                     int classes = sim::kNumClasses);

// Componentwise convex mix; throws nn::ShapeError on a length mismatch.
std::vector<double> update_logits(std::span<const double> old_logits,
                                  std::span<const double> current, std::span<const double> gamma,
                                  GammaOrientation orientation = GammaOrientation::CurrentWeighted);

// EWC++ state: decayed Fisher estimate and anchor parameters.
struct EwcState {
  std::vector<nn::Tensor> fisher;
  std::vector<nn::Tensor> anchor;
  std::uint64_t episodes_since_anchor = 0;
};

// Everything a learner owns during one run. Nothing here identifies a task.
struct LearnerState {
  policy::PolicyModel model;
  nn::OptState opt;
  EpisodicMemory memory;
  ConfidenceQueues queues;
  EwcState ewc;
  std::deque<std::shared_ptr<const expert::Demonstration>> recent;
  std::int64_t updates = 0;

  static LearnerState create(const MethodConfig& config);
};

// The differentiable part of one update: per-timestep CE over the stream
// batch, per-timestep CE over the sampled memory and, for the distilling
// methods, the logit distillation towards the stored logits.
struct Objective {
  nn::Var total{};
  double stream_ce = 0.0;
  double memory_ce = 0.0;
  double distill = 0.0;
  std::vector<policy::EpisodeVars> stream_vars;
  std::vector<policy::EpisodeVars> memory_vars;
};
Objective step_objective(const MethodConfig& config, const policy::PolicyModel& model,
                         nn::Tape& tape,
                         std::span<const std::shared_ptr<const expert::Demonstration>> stream_demos,
                         std::span<const MemoryEntry* const> memory);

struct HeadSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};
HeadSummary summarize_head(std::span<const double> values);

struct StepLog {
  std::size_t stream_index = 0;
  double lr = 0.0;
  double loss = 0.0;
  double stream_ce = 0.0;
  double memory_ce = 0.0;
  double distill = 0.0;
  double ewc_penalty = 0.0;
  bool memory_skipped = false;
  std::size_t memory_size = 0;
  HeadSummary gamma_a;
  HeadSummary gamma_c;
  // Diagnostic traces: gamma per class and, for the memory frames of this
  // step, how many frames of each ground-truth class the current logits
  // classified correctly.
  std::vector<double> gamma_action;
  std::vector<double> gamma_class;
  std::vector<int> memory_action_correct;
  std::vector<int> memory_action_total;
  std::vector<int> memory_class_correct;
  std::vector<int> memory_class_total;
};

// One update for one streamed episode. The stream record carries only the
// stream position and the demonstration.
StepLog train_step(const MethodConfig& config, LearnerState& state,
                   const stream::StreamRecord& record, Rng& rng);

// Called with the zero-based index of the task just finished.
using CheckpointFn = std::function<void(int task_index, const policy::PolicyModel& model)>;

struct RunResult {
  std::vector<nn::ParamSet> checkpoints;
  std::vector<StepLog> steps;
  policy::PolicyModel final_model;
};

// Streams the benchmark once in `ordering` (Joint instead trains for
// joint_epochs over the union of all training data) and checkpoints at every
// task end. Joint produces a single checkpoint after its last epoch.
RunResult run_continual_training(const MethodConfig& config, const stream::Benchmark& benchmark,
                                 const stream::Ordering& ordering, std::uint64_t seed,
                                 const CheckpointFn& on_checkpoint = {});

// One JSON object per step.
void write_step_log(std::ostream& out, const StepLog& log);

}  // namespace minialfred::cl
