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

#include <array>
#include <deque>
#include <string>

#include "minialfred/expert.hpp"

namespace minialfred::expert {
namespace {

using sim::Action;
using sim::Behavior;
using sim::Cell;
using sim::Heading;
using sim::ObjectClass;
using sim::SimState;

constexpr int kPoseCount = sim::kGridSize * sim::kGridSize * 4;

int pose_index(Pose p) {
  return (p.cell.row * sim::kGridSize + p.cell.col) * 4 + static_cast<int>(p.heading);
}

Pose pose_at(int index) {
  const int h = index % 4;
  const int cell = index / 4;
  return {{cell / sim::kGridSize, cell % sim::kGridSize}, static_cast<Heading>(h)};
}

Heading opposite(Heading h) { return sim::turn_right(sim::turn_right(h)); }

class DemoBuilder {
 public:
  DemoBuilder(const sim::Layout& layout, const sim::TaskSpec& task)
      : task_(task), state_(sim::initial_state(layout)) {
    demo_.instruction = instruction_for(task);
  }

  void act(Action action, std::optional<ObjectClass> target = std::nullopt) {
    if (state_.step_count >= sim::kStepBudget) {
      throw PlanningError("demonstration exceeds the step budget");
    }
    DemoStep step;
    step.features = sim::observe(state_, demo_.instruction);
    step.action = action;
    step.target_class = target;
    auto r = sim::step(state_, action, target);
    if (!r.outcome.ok) {
      throw PlanningError("scripted step failed: " + std::string(sim::name(action)) + " -> " +
                          std::string(sim::name(r.outcome.event)));
    }
    state_ = std::move(r.state);
    demo_.steps.push_back(std::move(step));
  }

  void go_to(ObjectClass cls) {
    const auto id = state_.layout.find(cls);
    if (!id || !state_.layout.objects[*id].position) {
      throw PlanningError("no placed object of class " + std::string(sim::name(cls)));
    }
    const auto goals = interaction_poses(state_.layout, *state_.layout.objects[*id].position);
    for (Action a : shortest_path_to_any(state_, goals)) act(a);
  }

  void pick(ObjectClass cls) {
    go_to(cls);
    act(Action::Pickup, cls);
  }

  void place(ObjectClass recep) {
    go_to(recep);
    act(Action::Put, recep);
  }

  // Leaves the object inside the appliance after running it, then takes it out.
  void heat(ObjectClass obj) {
    go_to(ObjectClass::Microwave);
    act(Action::Open, ObjectClass::Microwave);
    act(Action::Put, ObjectClass::Microwave);
    act(Action::Close, ObjectClass::Microwave);
    act(Action::Toggle, ObjectClass::Microwave);
    act(Action::Open, ObjectClass::Microwave);
    act(Action::Pickup, obj);
    act(Action::Close, ObjectClass::Microwave);
  }

  void cool(ObjectClass obj) {
    go_to(ObjectClass::Fridge);
    act(Action::Open, ObjectClass::Fridge);
    act(Action::Put, ObjectClass::Fridge);
    act(Action::Close, ObjectClass::Fridge);
    act(Action::Open, ObjectClass::Fridge);
    act(Action::Pickup, obj);
    act(Action::Close, ObjectClass::Fridge);
  }

  void clean(ObjectClass obj) {
    go_to(ObjectClass::Sink);
    act(Action::Put, ObjectClass::Sink);
    act(Action::Toggle, ObjectClass::Sink);
    act(Action::Toggle, ObjectClass::Sink);
    act(Action::Pickup, obj);
  }

  Demonstration finish() {
    act(Action::Stop);
    if (!sim::goal_satisfaction(state_, task_).success()) {
      throw PlanningError("scripted demonstration did not reach the goal");
    }
    label_progress(demo_);
    return std::move(demo_);
  }

 private:
  const sim::TaskSpec& task_;
  SimState state_;
  Demonstration demo_;
};

}  // namespace

std::vector<Pose> interaction_poses(const sim::Layout& layout, Cell target) {
  std::vector<Pose> poses;
  for (int h = 0; h < 4; ++h) {
    const auto heading = static_cast<Heading>(h);
    const Cell stand = sim::ahead(target, opposite(heading));
    if (layout.walkable(stand)) poses.push_back({stand, heading});
  }
  return poses;
}

std::vector<Action> shortest_path_to_any(const SimState& state, std::span<const Pose> goals) {
  std::array<bool, kPoseCount> is_goal{};
  for (const Pose& g : goals) {
    if (sim::in_grid(g.cell)) is_goal[pose_index(g)] = true;
  }
  std::array<int, kPoseCount> parent;
  std::array<Action, kPoseCount> via{};
  parent.fill(-2);
  const int start = pose_index({state.agent_pos, state.heading});
  parent[start] = -1;
  std::deque<int> frontier{start};
  while (!frontier.empty()) {
    const int cur = frontier.front();
    frontier.pop_front();
    if (is_goal[cur]) {
      std::vector<Action> plan;
      for (int n = cur; parent[n] >= 0; n = parent[n]) plan.push_back(via[n]);
      return {plan.rbegin(), plan.rend()};
    }
    const Pose p = pose_at(cur);
    const std::array<std::pair<Action, Pose>, 3> moves = {{
        {Action::MoveAhead, {sim::ahead(p.cell, p.heading), p.heading}},
        {Action::RotateLeft, {p.cell, sim::turn_left(p.heading)}},
        {Action::RotateRight, {p.cell, sim::turn_right(p.heading)}},
    }};
    for (const auto& [action, next] : moves) {
      if (!state.layout.walkable(next.cell)) continue;
      const int ni = pose_index(next);
      if (parent[ni] != -2) continue;
      parent[ni] = cur;
      via[ni] = action;
      frontier.push_back(ni);
    }
  }
  throw PlanningError("goal pose unreachable");
}

std::vector<Action> shortest_path_actions(const SimState& state, Pose goal) {
  return shortest_path_to_any(state, std::span<const Pose>(&goal, 1));
}

void label_progress(Demonstration& demo) {
  const double n = static_cast<double>(demo.steps.size());
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    demo.steps[t].progress = static_cast<double>(t + 1) / n;
  }
}

std::size_t Demonstration::interaction_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += sim::is_interaction(s.action) ? 1 : 0;
  return n;
}

Episode plan_demonstration(const sim::Layout& layout, const sim::TaskSpec& task,
                           std::uint64_t seed) {
  if (!sim::task_admissible(layout, task)) throw PlanningError("task is not admissible here");
  DemoBuilder b(layout, task);
  const ObjectClass obj = task.target_object;
  const ObjectClass recep = task.target_receptacle;
  switch (task.behavior) {
    case Behavior::Examine:
      b.pick(obj);
      b.go_to(ObjectClass::Lamp);
      b.act(Action::Toggle, ObjectClass::Lamp);
      break;
    case Behavior::PickPlace:
      b.pick(obj);
      b.place(recep);
      break;
    case Behavior::Heat:
      b.pick(obj);
      b.heat(obj);
      b.place(recep);
      break;
    case Behavior::Cool:
      b.pick(obj);
      b.cool(obj);
      b.place(recep);
      break;
    case Behavior::Clean:
      b.pick(obj);
      b.clean(obj);
      b.place(recep);
      break;
    case Behavior::Pick2Place:
      b.pick(obj);
      b.place(recep);
      b.pick(*task.second_object);
      b.place(recep);
      break;
    case Behavior::Movable:
      b.pick(obj);
      b.place(ObjectClass::Bowl);
      b.pick(ObjectClass::Bowl);
      b.place(recep);
      break;
  }
  Episode e;
  e.demo = std::make_shared<const Demonstration>(b.finish());
  e.task = task;
  e.env_type = layout.env_type;
  e.layout_id = layout.layout_id;
  e.seen = layout.seen;
  e.seed = seed;
  return e;
}

sim::Layout Episode::initial_layout() const {
  return sim::rearrange(sim::generate_layout(env_type, layout_id, seen), placement_seed);
}

ReplayResult replay(const Episode& episode) {
  ReplayResult r;
  r.final_state = sim::initial_state(episode.initial_layout());
  for (const auto& s : episode.demo->steps) {
    r.final_state = sim::step(r.final_state, s.action, s.target_class).state;
  }
  r.goals = sim::goal_satisfaction(r.final_state, episode.task);
  r.failed_interactions = r.final_state.failed_interactions;
  return r;
}

}  // namespace minialfred::expert
