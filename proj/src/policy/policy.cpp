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

#include "minialfred/policy.hpp"

#include <array>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace minialfred::policy {
namespace {

using nn::Tape;
using nn::Tensor;
using nn::Var;

std::vector<int> instruction_tokens(const sim::FeatureVector& f, int vocab) {
  std::vector<int> ids;
  for (int i = 0; i < sim::kMaxInstructionTokens; ++i) {
    const int tok = static_cast<int>(f[sim::kDenseDim + i]);
    if (tok == sim::kPadToken) continue;
    if (tok < 0 || tok >= vocab) throw nn::ShapeError("instruction token out of vocabulary");
    ids.push_back(tok);
  }
  return ids;
}

Var instruction_embedding(const PolicyModel& m, Tape& t, const sim::FeatureVector& f) {
  const auto ids = instruction_tokens(f, m.params[m.tokens.table].rows);
  if (ids.empty()) return t.constant(Tensor(1, m.config.embed));
  return t.mean_rows(m.tokens.forward(t, ids));
}

Tensor dense_rows(std::span<const sim::FeatureVector* const> features) {
  Tensor x(static_cast<int>(features.size()), sim::kDenseDim);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i]->size() != static_cast<std::size_t>(sim::kFeatureDim)) {
      throw nn::ShapeError("feature vector has " + std::to_string(features[i]->size()) +
                           " entries, expected " + std::to_string(sim::kFeatureDim));
    }
    std::copy_n(features[i]->data(), sim::kDenseDim, x.row_ptr(static_cast<int>(i)));
  }
  return x;
}

Var project(const PolicyModel& m, Tape& t, Var obs, Var instr, std::span<const int> prev_ids) {
  const Var context = t.add(t.matmul(instr, t.param(m.w_instr)), t.param(m.b_proj));
  Var pre = t.add_row(t.matmul(obs, t.param(m.w_obs)), context);
  pre = t.add(pre, t.matmul(m.prev_action.forward(t, prev_ids), t.param(m.w_act)));
  return t.tanh(pre);
}

struct Heads {
  Var action;
  Var cls;
  Var progress;
};

Heads heads(const PolicyModel& m, Tape& t, Var hidden, Var proj) {
  const std::array<Var, 2> parts{hidden, proj};
  const Var feat = t.concat_cols(parts);
  return {m.action_head.forward(t, feat), m.class_head.forward(t, feat),
          t.sigmoid(m.progress_head.forward(t, feat))};
}

LossTerms step_loss(Tape& t, const EpisodeVars& out, const expert::Demonstration& demo,
                    const LossWeights& w, double ce_scale, double progress_scale) {
  const std::size_t T = demo.steps.size();
  std::vector<int> actions(T), classes(T);
  std::vector<double> wa(T, w.action * ce_scale), wc(T, 0.0), wp(T, w.progress * progress_scale);
  Tensor progress_target(static_cast<int>(T), 1);
  for (std::size_t i = 0; i < T; ++i) {
    const auto& s = demo.steps[i];
    actions[i] = static_cast<int>(s.action);
    if (sim::is_interaction(s.action)) {
      if (!s.target_class) throw std::invalid_argument("interaction step without a class label");
      classes[i] = static_cast<int>(*s.target_class);
      wc[i] = w.cls * ce_scale;
    }
    progress_target.data[i] = s.progress;
  }
  LossTerms terms;
  const Var la = t.softmax_cross_entropy(out.action_logits, actions, wa);
  const Var lc = t.softmax_cross_entropy(out.class_logits, classes, wc);
  const Var lp = t.squared_error(out.progress, progress_target, wp);
  terms.action = t.value(la).data[0];
  terms.cls = t.value(lc).data[0];
  terms.progress = t.value(lp).data[0];
  terms.total = t.add(t.add(la, lc), lp);
  return terms;
}

}  // namespace

PolicyModel PolicyModel::create(const PolicyConfig& config) {
  if (config.hidden <= 0 || config.embed <= 0) throw std::invalid_argument("widths must be positive");
  Rng rng(mix_seed({config.init_seed, 0x9011c7}));
  PolicyModel m;
  m.config = config;
  const int H = config.hidden;
  const int E = config.embed;
  m.tokens = nn::Embedding::create(m.params, "tokens", expert::vocabulary_size(), E, rng);
  m.prev_action = nn::Embedding::create(m.params, "prev_action", kPrevActionVocab, E, rng);
  m.w_obs = m.params.add("proj.w_obs", nn::glorot_uniform(sim::kDenseDim, H, rng));
  m.w_instr = m.params.add("proj.w_instr", nn::glorot_uniform(E, H, rng));
  m.w_act = m.params.add("proj.w_act", nn::glorot_uniform(E, H, rng));
  m.b_proj = m.params.add("proj.b", Tensor(1, H));
  m.gru = nn::GruCell::create(m.params, "gru", H, H, rng);
  m.action_head = nn::Dense::create(m.params, "head.action", 2 * H, sim::kNumActions, rng);
  m.class_head = nn::Dense::create(m.params, "head.class", 2 * H, sim::kNumClasses, rng);
  m.progress_head = nn::Dense::create(m.params, "head.progress", 2 * H, 1, rng);
  return m;
}

EpisodeVars episode_forward(const PolicyModel& m, Tape& t, const expert::Demonstration& demo) {
  if (demo.steps.empty()) throw nn::ShapeError("episode has no steps");
  const std::size_t T = demo.steps.size();
  std::vector<const sim::FeatureVector*> rows(T);
  std::vector<int> prev(T);
  for (std::size_t i = 0; i < T; ++i) {
    rows[i] = &demo.steps[i].features;
    prev[i] = i == 0 ? kStartAction : static_cast<int>(demo.steps[i - 1].action);
  }
  const Var obs = t.constant(dense_rows(rows));
  const Var instr = instruction_embedding(m, t, demo.steps.front().features);
  const Var proj = project(m, t, obs, instr, prev);
  const Var gates = m.gru.input_gates(t, proj);
  Var h = t.constant(Tensor(1, m.config.hidden));
  std::vector<Var> hs;
  hs.reserve(T);
  for (std::size_t i = 0; i < T; ++i) {
    h = m.gru.step(t, t.row(gates, static_cast<int>(i)), h);
    hs.push_back(h);
  }
  const Heads out = heads(m, t, t.stack_rows(hs), proj);
  return {out.action, out.cls, out.progress, h};
}

EpisodeOutputs episode_outputs(const PolicyModel& m, const expert::Demonstration& demo) {
  Tape t(&m.params);
  const auto v = episode_forward(m, t, demo);
  return {t.value(v.action_logits), t.value(v.class_logits), t.value(v.progress),
          t.value(v.final_hidden)};
}

LossTerms supervised_loss(Tape& t, const EpisodeVars& out, const expert::Demonstration& demo,
                          const LossWeights& w) {
  return step_loss(t, out, demo, w, 1.0, 1.0 / static_cast<double>(demo.steps.size()));
}

LossTerms scaled_step_loss(Tape& t, const EpisodeVars& out, const expert::Demonstration& demo,
                           const LossWeights& w, double scale) {
  return step_loss(t, out, demo, w, scale, scale);
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

RolloutResult greedy_rollout(const PolicyModel& m, const sim::Layout& layout,
                             const sim::TaskSpec& task, int budget) {
  RolloutResult r;
  sim::SimState s = sim::initial_state(layout);
  const auto instruction = expert::instruction_for(task);
  Tensor h(1, m.config.hidden);
  int prev = kStartAction;
  const int limit = std::min(budget, sim::kStepBudget);
  while (s.step_count < limit && s.failed_interactions < sim::kMaxFailedInteractions) {
    const auto f = sim::observe(s, instruction);
    Tape t(&m.params);
    const sim::FeatureVector* row = &f;
    const Var obs = t.constant(dense_rows(std::span(&row, 1)));
    const Var instr = instruction_embedding(m, t, f);
    const std::array<int, 1> prev_ids{prev};
    const Var proj = project(m, t, obs, instr, prev_ids);
    const Var hv = m.gru.step(t, m.gru.input_gates(t, proj), t.constant(h));
    const Heads out = heads(m, t, hv, proj);
    h = t.value(hv);
    const auto action = static_cast<sim::Action>(argmax(t.value(out.action).data));
    std::optional<sim::ObjectClass> target;
    if (sim::is_interaction(action)) {
      target = static_cast<sim::ObjectClass>(argmax(t.value(out.cls).data));
    }
    auto res = sim::step(s, action, target);
    s = std::move(res.state);
    r.trajectory.push_back({action, target, res.outcome.ok, res.outcome.event});
    prev = static_cast<int>(action);
    if (action == sim::Action::Stop) break;
  }
  r.goals = sim::goal_satisfaction(s, task);
  r.success = r.goals.success();
  r.gc_fraction = r.goals.total > 0 ? static_cast<double>(r.goals.satisfied) / r.goals.total : 0.0;
  return r;
}

void write_trajectory(std::ostream& out, const RolloutResult& rollout) {
  for (std::size_t i = 0; i < rollout.trajectory.size(); ++i) {
    const auto& s = rollout.trajectory[i];
    nlohmann::json j = {
        {"step", i},
        {"action", sim::name(s.action)},
        {"target", s.target ? nlohmann::json(sim::name(*s.target)) : nlohmann::json(nullptr)},
        {"ok", s.ok},
    };
    out << j.dump() << '\n';
  }
}

}  // namespace minialfred::policy
