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
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "minialfred/clmethods.hpp"

namespace minialfred::cl {
namespace {

using nn::Tape;
using nn::Tensor;
using nn::Var;

std::size_t total_steps(std::span<const std::shared_ptr<const expert::Demonstration>> demos) {
  std::size_t n = 0;
  for (const auto& d : demos) n += d->steps.size();
  return n;
}

std::vector<int> interaction_rows(const expert::Demonstration& demo) {
  std::vector<int> rows;
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    if (sim::is_interaction(demo.steps[t].action)) rows.push_back(static_cast<int>(t));
  }
  return rows;
}

Tensor take_rows(const Tensor& src, std::span<const int> rows) {
  Tensor out(static_cast<int>(rows.size()), src.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(src.row_ptr(rows[i]), src.cols, out.row_ptr(static_cast<int>(i)));
  }
  return out;
}

// Cross-entropy over a set of episodes, averaged per timestep.
struct BatchCe {
  std::vector<policy::EpisodeVars> vars;
  Var loss{};
  double value = 0.0;
};

BatchCe batch_ce(const MethodConfig& config, const policy::PolicyModel& model, Tape& tape,
                 std::span<const std::shared_ptr<const expert::Demonstration>> demos) {
  BatchCe out;
  const double scale = 1.0 / static_cast<double>(total_steps(demos));
  bool first = true;
  for (const auto& d : demos) {
    out.vars.push_back(policy::episode_forward(model, tape, *d));
    const auto terms = policy::scaled_step_loss(tape, out.vars.back(), *d, config.loss_weights, scale);
    out.loss = first ? terms.total : tape.add(out.loss, terms.total);
    first = false;
  }
  out.value = tape.value(out.loss).data[0];
  return out;
}

// alpha * (1/steps) * sum_t ||z_t - z_old_t||^2 over both heads, the class
// head at interaction steps only.
Var distill_loss(Tape& tape, const policy::EpisodeVars& vars, const MemoryEntry& entry,
                 double weight) {
  const auto T = static_cast<int>(entry.demo->steps.size());
  const std::vector<double> wa(static_cast<std::size_t>(T), weight);
  const Var la = tape.squared_error(vars.action_logits, entry.action_logits, wa);
  const auto rows = interaction_rows(*entry.demo);
  Tensor target(T, sim::kNumClasses);
  std::vector<double> wc(static_cast<std::size_t>(T), 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy_n(entry.class_logits.row_ptr(static_cast<int>(k)), sim::kNumClasses,
                target.row_ptr(rows[k]));
    wc[static_cast<std::size_t>(rows[k])] = weight;
  }
  return tape.add(la, tape.squared_error(vars.class_logits, target, wc));
}

void mix_rows(Tensor& stored, const Tensor& current, std::span<const int> current_rows,
              std::span<const double> gamma, GammaOrientation orientation) {
  for (int r = 0; r < stored.rows; ++r) {
    const int src = current_rows.empty() ? r : current_rows[static_cast<std::size_t>(r)];
    const std::span<const double> old_row(stored.row_ptr(r), stored.cols);
    const std::span<const double> cur_row(current.row_ptr(src), current.cols);
    const auto mixed = update_logits(old_row, cur_row, gamma, orientation);
    std::copy(mixed.begin(), mixed.end(), stored.row_ptr(r));
  }
}

void count_correct(const Tensor& logits, int row, int label, std::vector<int>& correct,
                   std::vector<int>& total) {
  const std::span<const double> z(logits.row_ptr(row), logits.cols);
  ++total[static_cast<std::size_t>(label)];
  if (policy::argmax(z) == label) ++correct[static_cast<std::size_t>(label)];
}

double ewc_penalty(const MethodConfig& config, const nn::ParamSet& params, const EwcState& ewc,
                   nn::Gradients& grads) {
  double penalty = 0.0;
  for (int i = 0; i < params.size(); ++i) {
    const auto& theta = params[i].data;
    const auto& anchor = ewc.anchor[static_cast<std::size_t>(i)].data;
    const auto& f = ewc.fisher[static_cast<std::size_t>(i)].data;
    auto& g = grads.g[static_cast<std::size_t>(i)].data;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double d = theta[k] - anchor[k];
      penalty += f[k] * d * d;
      g[k] += 2.0 * config.ewc_lambda * f[k] * d;
    }
  }
  return config.ewc_lambda * penalty;
}

void update_fisher(const MethodConfig& config, EwcState& ewc, const nn::Gradients& grads) {
  for (std::size_t i = 0; i < ewc.fisher.size(); ++i) {
    auto& f = ewc.fisher[i].data;
    const auto& g = grads.g[i].data;
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k] = config.fisher_decay * f[k] + (1.0 - config.fisher_decay) * g[k] * g[k];
    }
  }
}

void fill_gamma(StepLog& log, const Gamma& gamma) {
  log.gamma_action = gamma.action;
  log.gamma_class = gamma.cls;
  log.gamma_a = summarize_head(gamma.action);
  log.gamma_c = summarize_head(gamma.cls);
}

}  // namespace

Objective step_objective(const MethodConfig& config, const policy::PolicyModel& model, Tape& tape,
                         std::span<const std::shared_ptr<const expert::Demonstration>> stream_demos,
                         std::span<const MemoryEntry* const> memory) {
  if (stream_demos.empty()) throw std::invalid_argument("step objective without stream episodes");
  Objective out;
  BatchCe stream_part = batch_ce(config, model, tape, stream_demos);
  out.stream_ce = stream_part.value;
  out.total = stream_part.loss;
  out.stream_vars = std::move(stream_part.vars);
  if (memory.empty()) return out;

  std::vector<std::shared_ptr<const expert::Demonstration>> mem_demos;
  for (const auto* e : memory) mem_demos.push_back(e->demo);
  BatchCe memory_part = batch_ce(config, model, tape, mem_demos);
  out.memory_ce = memory_part.value;
  out.total = tape.add(out.total, memory_part.loss);
  if (uses_distillation(config.method) && config.alpha > 0.0) {
    const double w = config.alpha / static_cast<double>(total_steps(mem_demos));
    Var distill{};
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const Var d = distill_loss(tape, memory_part.vars[i], *memory[i], w);
      distill = i == 0 ? d : tape.add(distill, d);
    }
    out.distill = tape.value(distill).data[0];
    out.total = tape.add(out.total, distill);
  }
  out.memory_vars = std::move(memory_part.vars);
  return out;
}

LearnerState LearnerState::create(const MethodConfig& config) {
  config.validate();
  auto model = policy::PolicyModel::create(config.policy);
  auto opt = nn::OptState::for_params(model.params);
  EwcState ewc;
  for (int i = 0; i < model.params.size(); ++i) {
    ewc.fisher.emplace_back(model.params[i].rows, model.params[i].cols);
    ewc.anchor.push_back(model.params[i]);
  }
  return LearnerState{std::move(model), std::move(opt), EpisodicMemory(config.memory_size),
                      ConfidenceQueues(config.queue_n), std::move(ewc), {}, 0};
}

StepLog train_step(const MethodConfig& config, LearnerState& state,
                   const stream::StreamRecord& record, Rng& rng) {
  if (config.method == Method::Joint) {
    throw std::invalid_argument("Joint trains offline and has no stream step");
  }
  if (!record.demo || record.demo->steps.empty()) {
    throw std::invalid_argument("stream record without a demonstration");
  }
  StepLog log;
  log.stream_index = record.index;
  log.memory_action_correct.assign(sim::kNumActions, 0);
  log.memory_action_total.assign(sim::kNumActions, 0);
  log.memory_class_correct.assign(sim::kNumClasses, 0);
  log.memory_class_total.assign(sim::kNumClasses, 0);

  state.recent.push_back(record.demo);
  while (state.recent.size() > static_cast<std::size_t>(config.stream_batch)) {
    state.recent.pop_front();
  }
  const std::vector<std::shared_ptr<const expert::Demonstration>> stream_demos(
      state.recent.begin(), state.recent.end());

  auto& model = state.model;
  std::vector<std::size_t> slots;
  std::vector<const MemoryEntry*> sampled;
  if (uses_memory(config.method)) {
    slots = state.memory.sample(static_cast<std::size_t>(config.memory_batch), rng);
    log.memory_skipped = slots.empty();
    for (auto s : slots) sampled.push_back(&state.memory.entries()[s]);
  }
  Tape tape(&model.params);
  const Objective objective = step_objective(config, model, tape, stream_demos, sampled);
  log.stream_ce = objective.stream_ce;
  log.memory_ce = objective.memory_ce;
  log.distill = objective.distill;
  const Var loss = objective.total;

  tape.backward(loss);
  auto grads = nn::Gradients::zeros_like(model.params);
  tape.accumulate_param_grads(grads);
  log.loss = tape.value(loss).data[0];

  if (config.method == Method::EWCpp) {
    log.ewc_penalty = ewc_penalty(config, model.params, state.ewc, grads);
    log.loss += log.ewc_penalty;
  }

  // Everything below reads logits from the forward pass above, i.e. before
  // the parameter update.
  const auto& newest = objective.stream_vars.back();
  const Tensor stream_action = tape.value(newest.action_logits);
  const Tensor stream_class = tape.value(newest.class_logits);

  log.lr = config.lr.at(state.updates);
  nn::adam_step(model.params, grads, state.opt, log.lr);
  ++state.updates;

  if (config.method == Method::EWCpp) {
    update_fisher(config, state.ewc, grads);
    if (++state.ewc.episodes_since_anchor >= static_cast<std::uint64_t>(config.anchor_every)) {
      for (int i = 0; i < model.params.size(); ++i) state.ewc.anchor[static_cast<std::size_t>(i)] = model.params[i];
      state.ewc.episodes_since_anchor = 0;
    }
  }

  push_confidences(state.queues, stream_action, stream_class, *record.demo);
  const Gamma gamma = config.method == Method::CAMA_fixed
                          ? constant_gamma(config.alpha_a, config.alpha_c)
                          : compute_gamma(state.queues, config.alpha_a, config.alpha_c);
  fill_gamma(log, gamma);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& entry = state.memory.at(slots[i]);
    const Tensor za = tape.value(objective.memory_vars[i].action_logits);
    const Tensor zc = tape.value(objective.memory_vars[i].class_logits);
    const auto rows = interaction_rows(*entry.demo);
    for (int t = 0; t < za.rows; ++t) {
      count_correct(za, t, static_cast<int>(entry.demo->steps[static_cast<std::size_t>(t)].action),
                    log.memory_action_correct, log.memory_action_total);
    }
    for (int r : rows) {
      count_correct(zc, r, static_cast<int>(*entry.demo->steps[static_cast<std::size_t>(r)].target_class),
                    log.memory_class_correct, log.memory_class_total);
    }
    if (config.method == Method::CAMA || config.method == Method::CAMA_fixed) {
      mix_rows(entry.action_logits, za, {}, gamma.action, config.orientation);
      mix_rows(entry.class_logits, zc, rows, gamma.cls, config.orientation);
    }
  }

  if (uses_memory(config.method)) {
    MemoryEntry entry{record.demo, stream_action,
                      take_rows(stream_class, interaction_rows(*record.demo)), record.index};
    reservoir_insert(state.memory, std::move(entry), rng);
  }
  log.memory_size = state.memory.size();
  return log;
}

namespace {

StepLog joint_step(const MethodConfig& config, LearnerState& state,
                   std::span<const std::shared_ptr<const expert::Demonstration>> batch,
                   std::size_t index) {
  StepLog log;
  log.stream_index = index;
  Tape tape(&state.model.params);
  const BatchCe part = batch_ce(config, state.model, tape, batch);
  tape.backward(part.loss);
  auto grads = nn::Gradients::zeros_like(state.model.params);
  tape.accumulate_param_grads(grads);
  log.loss = log.stream_ce = part.value;
  log.lr = config.lr.at(state.updates);
  nn::adam_step(state.model.params, grads, state.opt, log.lr);
  ++state.updates;
  return log;
}

}  // namespace

RunResult run_continual_training(const MethodConfig& config, const stream::Benchmark& benchmark,
                                 const stream::Ordering& ordering, std::uint64_t seed,
                                 const CheckpointFn& on_checkpoint) {
  MethodConfig cfg = config;
  cfg.policy.init_seed = mix_seed({seed, 0x1417});
  LearnerState state = LearnerState::create(cfg);
  Rng rng(mix_seed({seed, 0x7a11}));
  RunResult result;

  auto checkpoint = [&](int task_index) {
    result.checkpoints.push_back(state.model.params);
    if (on_checkpoint) on_checkpoint(task_index, state.model);
  };

  stream::EpisodeStream stream(benchmark, ordering, mix_seed({seed, 0x5eed}));
  const auto task_ends = stream.task_ends();

  if (cfg.method == Method::Joint) {
    std::vector<std::shared_ptr<const expert::Demonstration>> all;
    while (auto rec = stream.next()) all.push_back(rec->demo);
    const auto batch = static_cast<std::size_t>(cfg.stream_batch + cfg.memory_batch);
    std::size_t index = 0;
    for (int epoch = 0; epoch < cfg.joint_epochs; ++epoch) {
      rng.shuffle(all);
      for (std::size_t start = 0; start < all.size(); start += batch) {
        const auto end = std::min(all.size(), start + batch);
        const std::span<const std::shared_ptr<const expert::Demonstration>> b(all.data() + start,
                                                                              end - start);
        result.steps.push_back(joint_step(cfg, state, b, index++));
      }
    }
    checkpoint(static_cast<int>(task_ends.size()) - 1);
  } else {
    std::size_t task = 0;
    std::size_t consumed = 0;
    while (auto rec = stream.next()) {
      result.steps.push_back(train_step(cfg, state, *rec, rng));
      ++consumed;
      while (task < task_ends.size() && consumed == task_ends[task]) checkpoint(static_cast<int>(task++));
    }
  }
  result.final_model = std::move(state.model);
  return result;
}

void write_step_log(std::ostream& out, const StepLog& log) {
  auto head = [](const HeadSummary& h) {
    return nlohmann::json{{"min", h.min}, {"mean", h.mean}, {"max", h.max}};
  };
  const nlohmann::json j = {
      {"stream_index", log.stream_index},
      {"lr", log.lr},
      {"loss", log.loss},
      {"stream_ce", log.stream_ce},
      {"memory_ce", log.memory_ce},
      {"distill", log.distill},
      {"ewc_penalty", log.ewc_penalty},
      {"memory_skipped", log.memory_skipped},
      {"memory_size", log.memory_size},
      {"gamma_a", head(log.gamma_a)},
      {"gamma_c", head(log.gamma_c)},
  };
  out << j.dump() << '\n';
}

}  // namespace minialfred::cl
