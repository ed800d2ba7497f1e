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

#include "minialfred/gridsim/sim.hpp"

#include <algorithm>

namespace minialfred::sim {
namespace {

void collect_accessible(const Layout& layout, int id, std::vector<int>& out) {
  out.push_back(id);
  const auto& o = layout.objects[id];
  const auto& t = traits(o.cls);
  if (t.openable && !o.state.open) return;
  for (int child : o.contains) collect_accessible(layout, child, out);
}

void set_position(Layout& layout, int id, std::optional<Cell> pos) {
  auto& o = layout.objects[id];
  o.position = pos;
  for (int child : o.contains) set_position(layout, child, pos);
}

void detach(Layout& layout, int id) {
  if (const auto parent = layout.parent_of(id)) {
    auto& c = layout.objects[*parent].contains;
    c.erase(std::remove(c.begin(), c.end(), id), c.end());
  }
}

template <class F>
void for_each_content(Layout& layout, int id, F&& f) {
  for (int child : layout.objects[id].contains) {
    f(layout.objects[child]);
    for_each_content(layout, child, f);
  }
}

std::optional<int> find_accessible(const Layout& layout, Cell cell, ObjectClass cls) {
  for (int id : accessible_objects(layout, cell)) {
    if (layout.objects[id].cls == cls) return id;
  }
  return std::nullopt;
}

StepOutcome fail(SimState& s, Event e) {
  ++s.failed_interactions;
  return {false, e};
}

StepOutcome interact(SimState& s, Action action, ObjectClass target) {
  Layout& layout = s.layout;
  const Cell faced = ahead(s.agent_pos, s.heading);
  const auto found = find_accessible(layout, faced, target);
  if (!found) return fail(s, Event::TargetNotFound);
  const int id = *found;
  ObjectInstance& obj = layout.objects[id];
  const ClassTraits& t = traits(obj.cls);

  switch (action) {
    case Action::Pickup: {
      if (!t.portable) return fail(s, Event::NotPermitted);
      if (!s.inventory) {
        detach(layout, id);
        set_position(layout, id, std::nullopt);
        layout.objects[id].ever_picked = true;
        s.inventory = id;
        return {true, Event::PickedUp};
      }
      // Carrying a container: the picked object goes into it.
      const ObjectInstance& held = layout.objects[*s.inventory];
      if (traits(held.cls).container && !t.container && id != *s.inventory) {
        detach(layout, id);
        set_position(layout, id, std::nullopt);
        layout.objects[id].ever_picked = true;
        layout.objects[*s.inventory].contains.push_back(id);
        return {true, Event::PickedUp};
      }
      return fail(s, Event::NotPermitted);
    }
    case Action::Put: {
      if (!s.inventory || !t.receptacle || id == *s.inventory) return fail(s, Event::NotPermitted);
      if (t.openable && !obj.state.open) return fail(s, Event::NotPermitted);
      const int held = *s.inventory;
      if (t.container && traits(layout.objects[held].cls).container) {
        return fail(s, Event::NotPermitted);
      }
      obj.contains.push_back(held);
      set_position(layout, held, faced);
      s.inventory.reset();
      return {true, Event::Placed};
    }
    case Action::Open: {
      if (!t.openable || obj.state.open) return fail(s, Event::NotPermitted);
      obj.state.open = true;
      return {true, Event::Opened};
    }
    case Action::Close: {
      if (!t.openable || !obj.state.open) return fail(s, Event::NotPermitted);
      obj.state.open = false;
      if (obj.cls == ObjectClass::Fridge) {
        for_each_content(layout, id, [](ObjectInstance& o) {
          o.state.cold = true;
          o.state.hot = false;
        });
      }
      return {true, Event::Closed};
    }
    case Action::Toggle: {
      if (!t.toggleable) return fail(s, Event::NotPermitted);
      obj.state.toggled_on = !obj.state.toggled_on;
      if (!obj.state.toggled_on) return {true, Event::ToggledOff};
      if (obj.cls == ObjectClass::Microwave) {
        for_each_content(layout, id, [](ObjectInstance& o) {
          o.state.hot = true;
          o.state.cold = false;
        });
      } else if (obj.cls == ObjectClass::Sink) {
        for_each_content(layout, id, [](ObjectInstance& o) {
          o.state.clean = true;
          o.state.dirty = false;
        });
      }
      return {true, Event::ToggledOn};
    }
    default: break;
  }
  return fail(s, Event::NotPermitted);
}

}  // namespace

std::vector<int> accessible_objects(const Layout& layout, Cell cell) {
  std::vector<int> out;
  if (!in_grid(cell)) return out;
  for (int id : layout.objects_at(cell)) {
    if (!layout.parent_of(id)) collect_accessible(layout, id, out);
  }
  return out;
}

StepResult step(const SimState& state, Action action, std::optional<ObjectClass> target) {
  if (state.step_count >= kStepBudget) throw SimError("step budget exhausted");
  if (is_interaction(action) != target.has_value()) {
    throw SimError(is_interaction(action) ? "interaction action requires a target class"
                                          : "navigation action takes no target class");
  }
  StepResult r{state, {}};
  SimState& s = r.state;
  ++s.step_count;
  switch (action) {
    case Action::MoveAhead: {
      const Cell next = ahead(s.agent_pos, s.heading);
      if (s.layout.walkable(next)) {
        s.agent_pos = next;
        r.outcome = {true, Event::Moved};
      } else {
        r.outcome = {false, Event::Blocked};
      }
      break;
    }
    case Action::RotateLeft:
      s.heading = turn_left(s.heading);
      r.outcome = {true, Event::Rotated};
      break;
    case Action::RotateRight:
      s.heading = turn_right(s.heading);
      r.outcome = {true, Event::Rotated};
      break;
    case Action::Stop: r.outcome = {true, Event::Stopped}; break;
    default: r.outcome = interact(s, action, *target); break;
  }
  return r;
}

bool condition_holds(const Layout& layout, const GoalCondition& condition) {
  const auto id = layout.find(condition.subject);
  if (!id) return false;
  const ObjectInstance& o = layout.objects[*id];
  switch (condition.predicate) {
    case Predicate::Picked: return o.ever_picked;
    case Predicate::On: {
      const auto parent = layout.parent_of(*id);
      return parent && condition.receptacle && layout.objects[*parent].cls == *condition.receptacle;
    }
    case Predicate::State: return condition.bit && o.state.get(*condition.bit);
  }
  return false;
}

GoalProgress goal_satisfaction(const SimState& state, const TaskSpec& task) {
  GoalProgress p;
  p.total = static_cast<int>(task.goal_conditions.size());
  for (const auto& gc : task.goal_conditions) {
    if (condition_holds(state.layout, gc)) ++p.satisfied;
  }
  return p;
}

}  // namespace minialfred::sim
