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
#include <vector>

#include "minialfred/expert.hpp"
#include "minialfred/nnkit.hpp"

namespace minialfred::policy {

struct PolicyConfig {
  int hidden = 64;
  int embed = 16;
  std::uint64_t init_seed = 0;
};

// Previous-action vocabulary: the nine actions plus a start token.
inline constexpr int kStartAction = sim::kNumActions;
inline constexpr int kPrevActionVocab = sim::kNumActions + 1;

// Dual-head recurrent agent. The observation, mean instruction embedding and
// previous-action embedding are projected and squashed, fed through a GRU,
// and the heads read [hidden state | projection].
struct PolicyModel {
  PolicyConfig config;
  nn::ParamSet params;
  nn::Embedding tokens;
  nn::Embedding prev_action;
  int w_obs = -1;
  int w_instr = -1;
  int w_act = -1;
  int b_proj = -1;
  nn::GruCell gru;
  nn::Dense action_head;
  nn::Dense class_head;
  nn::Dense progress_head;

  static PolicyModel create(const PolicyConfig& config);
  int action_width() const { return params[action_head.bias].cols; }
  int class_width() const { return params[class_head.bias].cols; }
};

// Tape handles for one teacher-forced episode.
struct EpisodeVars {
  nn::Var action_logits;  // T x |A|
  nn::Var class_logits;   // T x |C|
  nn::Var progress;       // T x 1, in (0, 1)
  nn::Var final_hidden;   // 1 x H
};

// Teacher forcing: the previous-action input at step t is the demonstrated
// action at t-1, and the start token at t = 0. Throws nn::ShapeError on a
// feature-dimension mismatch or an empty episode.
EpisodeVars episode_forward(const PolicyModel& model, nn::Tape& tape,
                            const expert::Demonstration& demo);

struct EpisodeOutputs {
  nn::Tensor action_logits;
  nn::Tensor class_logits;
  nn::Tensor progress;
  nn::Tensor final_hidden;
};
EpisodeOutputs episode_outputs(const PolicyModel& model, const expert::Demonstration& demo);

struct LossWeights {
  double action = 1.0;
  double cls = 1.0;
  double progress = 1.0;
};

struct LossTerms {
  nn::Var total;
  double action = 0.0;
  double cls = 0.0;
  double progress = 0.0;
};

// L = la * sum_t CE(action) + lc * sum_t 1[interaction] CE(class)
//   + lp * (1/T) sum_t (p_hat - p)^2.
// Throws std::invalid_argument when an interaction step lacks a class label.
LossTerms supervised_loss(nn::Tape& tape, const EpisodeVars& out,
                          const expert::Demonstration& demo, const LossWeights& weights = {});

// Every per-step term multiplied by `scale` (progress included), so that a
// batch loss built from these is a per-timestep average when scale is
// 1 / (total steps in the batch).
LossTerms scaled_step_loss(nn::Tape& tape, const EpisodeVars& out,
                           const expert::Demonstration& demo, const LossWeights& weights,
                           double scale);

// Lowest index among the maxima.
int argmax(std::span<const double> values);

struct TrajectoryStep {
  sim::Action action = sim::Action::Stop;
  std::optional<sim::ObjectClass> target;
  bool ok = false;
  sim::Event event = sim::Event::Stopped;
};

struct RolloutResult {
  std::vector<TrajectoryStep> trajectory;
  sim::GoalProgress goals;
  bool success = false;
  double gc_fraction = 0.0;
};

// Closed-loop execution feeding back the agent's own previous action.
// Interaction targets are the argmax of the class head. Stops on Stop, the
// step budget, or too many failed interactions.
RolloutResult greedy_rollout(const PolicyModel& model, const sim::Layout& layout,
                             const sim::TaskSpec& task, int budget = sim::kStepBudget);

// One JSON object per step: step, action, target, ok.
void write_trajectory(std::ostream& out, const RolloutResult& rollout);

}  // namespace minialfred::policy
