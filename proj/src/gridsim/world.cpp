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

#include "minialfred/gridsim/world.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "minialfred/gridsim/sim.hpp"

namespace minialfred::sim {
namespace {

using OC = ObjectClass;

constexpr std::array kKitchenFixtures = {OC::Table, OC::CounterTop, OC::Shelf,
                                         OC::Microwave, OC::Fridge, OC::Sink};
constexpr std::array kLivingroomFixtures = {OC::Table, OC::Shelf, OC::Sofa, OC::Lamp};
constexpr std::array kBedroomFixtures = {OC::Bed, OC::Shelf, OC::Lamp};
constexpr std::array kBathroomFixtures = {OC::Sink, OC::CounterTop, OC::Shelf};

constexpr std::array kKitchenPortables = {OC::Apple, OC::Tomato, OC::Mug, OC::Bowl};
constexpr std::array kLivingroomPortables = {OC::CD, OC::Mug, OC::Bowl};
constexpr std::array kBedroomPortables = {OC::CD, OC::Cloth, OC::Bowl};
constexpr std::array kBathroomPortables = {OC::Cloth, OC::Mug};

// Non-corner cells of the ring just inside the outer wall. Each touches the
// central 3x3 block, so a fixture there is always reachable from the centre.
constexpr std::array<Cell, 12> kFixtureSlots = {{
    {1, 2}, {1, 3}, {1, 4}, {5, 2}, {5, 3}, {5, 4},
    {2, 1}, {3, 1}, {4, 1}, {2, 5}, {3, 5}, {4, 5},
}};

constexpr int kStyleBins = 10;

void scatter_portables(Layout& layout, Rng& rng) {
  std::vector<int> surfaces;
  for (const auto& o : layout.objects) {
    if (traits(o.cls).surface) surfaces.push_back(o.id);
  }
  for (auto& o : layout.objects) {
    if (!traits(o.cls).portable) {
      o.contains.clear();
      continue;
    }
    o.contains.clear();
    o.state = StateBits{};
    o.state.dirty = traits(o.cls).cleanable;
    o.ever_picked = false;
  }
  for (auto& o : layout.objects) {
    if (!traits(o.cls).portable) continue;
    const int surface = surfaces[rng.uniform_index(surfaces.size())];
    layout.objects[surface].contains.push_back(o.id);
    o.position = layout.objects[surface].position;
  }
  layout.agent_start = {2 + static_cast<int>(rng.uniform_index(3)),
                        2 + static_cast<int>(rng.uniform_index(3))};
  layout.start_heading = static_cast<Heading>(rng.uniform_index(4));
}

std::optional<int> surface_of(const Layout& layout, ObjectClass cls) {
  const auto id = layout.find(cls);
  if (!id) return std::nullopt;
  return layout.parent_of(*id);
}

}  // namespace

std::span<const ObjectClass> fixtures_for(EnvType env) {
  switch (env) {
    case EnvType::Kitchen: return kKitchenFixtures;
    case EnvType::Livingroom: return kLivingroomFixtures;
    case EnvType::Bedroom: return kBedroomFixtures;
    case EnvType::Bathroom: return kBathroomFixtures;
  }
  return {};
}

std::span<const ObjectClass> portables_for(EnvType env) {
  switch (env) {
    case EnvType::Kitchen: return kKitchenPortables;
    case EnvType::Livingroom: return kLivingroomPortables;
    case EnvType::Bedroom: return kBedroomPortables;
    case EnvType::Bathroom: return kBathroomPortables;
  }
  return {};
}

bool admissible(Behavior behavior, EnvType env) {
  const auto fixtures = fixtures_for(env);
  const auto portables = portables_for(env);
  auto has = [](std::span<const ObjectClass> s, ObjectClass c) {
    return std::find(s.begin(), s.end(), c) != s.end();
  };
  switch (behavior) {
    case Behavior::Examine: return has(fixtures, OC::Lamp);
    case Behavior::PickPlace:
    case Behavior::Pick2Place: return true;
    case Behavior::Heat: return has(fixtures, OC::Microwave);
    case Behavior::Cool: return has(fixtures, OC::Fridge);
    case Behavior::Clean: return has(fixtures, OC::Sink);
    case Behavior::Movable: return has(portables, OC::Bowl);
  }
  return false;
}

std::vector<EnvType> admissible_envs(Behavior behavior) {
  std::vector<EnvType> out;
  for (int e = 0; e < kNumEnvTypes; ++e) {
    if (admissible(behavior, static_cast<EnvType>(e))) out.push_back(static_cast<EnvType>(e));
  }
  return out;
}

std::vector<Behavior> admissible_behaviors(EnvType env) {
  std::vector<Behavior> out;
  for (int b = 0; b < kNumBehaviors; ++b) {
    if (admissible(static_cast<Behavior>(b), env)) out.push_back(static_cast<Behavior>(b));
  }
  return out;
}

Layout generate_layout(EnvType env, int style_seed, bool seen) {
  Rng rng(mix_seed({0x6c61796f7574ULL, static_cast<std::uint64_t>(env),
                    static_cast<std::uint64_t>(style_seed), seen ? 1ULL : 0ULL}));
  Layout layout;
  layout.env_type = env;
  layout.layout_id = style_seed;
  layout.seen = seen;
  for (int r = 0; r < kGridSize; ++r) {
    for (int c = 0; c < kGridSize; ++c) {
      const bool border = r == 0 || c == 0 || r == kGridSize - 1 || c == kGridSize - 1;
      layout.grid[r][c] = border ? Tile::Wall : Tile::Floor;
    }
  }
  // Seen styles use the even bins of [0, 1), unseen the odd ones.
  for (auto& s : layout.style) {
    const auto bin = static_cast<double>(2 * rng.uniform_index(kStyleBins) + (seen ? 0 : 1));
    s = (bin + rng.uniform01()) / (2.0 * kStyleBins);
  }
  std::vector<Cell> slots(kFixtureSlots.begin(), kFixtureSlots.end());
  rng.shuffle(slots);
  const auto fixtures = fixtures_for(env);
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    ObjectInstance o;
    o.id = static_cast<int>(layout.objects.size());
    o.cls = fixtures[i];
    o.position = slots[i];
    layout.grid[slots[i].row][slots[i].col] = Tile::Fixture;
    layout.objects.push_back(o);
  }
  for (ObjectClass cls : portables_for(env)) {
    ObjectInstance o;
    o.id = static_cast<int>(layout.objects.size());
    o.cls = cls;
    layout.objects.push_back(o);
  }
  scatter_portables(layout, rng);
  return layout;
}

Layout rearrange(const Layout& layout, std::uint64_t placement_seed) {
  Rng rng(mix_seed({0x706c616365ULL, placement_seed, static_cast<std::uint64_t>(layout.env_type),
                    static_cast<std::uint64_t>(layout.layout_id), layout.seen ? 1ULL : 0ULL}));
  Layout out = layout;
  for (auto& o : out.objects) {
    if (!traits(o.cls).portable) o.state = StateBits{};
  }
  scatter_portables(out, rng);
  return out;
}

std::vector<GoalCondition> goal_conditions_for(Behavior behavior, ObjectClass target,
                                               std::optional<ObjectClass> second,
                                               ObjectClass receptacle) {
  auto picked = [](OC c) { return GoalCondition{Predicate::Picked, c, std::nullopt, std::nullopt}; };
  auto on = [](OC c, OC r) { return GoalCondition{Predicate::On, c, r, std::nullopt}; };
  auto state = [](OC c, StateBit b) { return GoalCondition{Predicate::State, c, std::nullopt, b}; };
  switch (behavior) {
    case Behavior::Examine: return {picked(target), state(receptacle, StateBit::ToggledOn)};
    case Behavior::PickPlace: return {picked(target), on(target, receptacle)};
    case Behavior::Heat: return {picked(target), state(target, StateBit::Hot), on(target, receptacle)};
    case Behavior::Cool:
      return {picked(target), state(target, StateBit::Cold), on(target, receptacle)};
    case Behavior::Clean:
      return {picked(target), state(target, StateBit::Clean), on(target, receptacle)};
    case Behavior::Pick2Place: {
      const OC other = second.value_or(target);
      return {picked(target), on(target, receptacle), picked(other), on(other, receptacle)};
    }
    case Behavior::Movable:
      return {picked(target), on(target, OC::Bowl), on(OC::Bowl, receptacle)};
  }
  return {};
}

TaskSpec make_task(Behavior behavior, ObjectClass target, std::optional<ObjectClass> second,
                   ObjectClass receptacle) {
  TaskSpec t;
  t.behavior = behavior;
  t.target_object = target;
  t.second_object = behavior == Behavior::Pick2Place ? second : std::nullopt;
  t.target_receptacle = receptacle;
  t.goal_conditions = goal_conditions_for(behavior, target, t.second_object, receptacle);
  return t;
}

bool task_admissible(const Layout& layout, const TaskSpec& task) {
  if (!admissible(task.behavior, layout.env_type)) return false;
  if (task.goal_conditions.empty()) return false;
  if (task.goal_conditions != goal_conditions_for(task.behavior, task.target_object,
                                                  task.second_object, task.target_receptacle)) {
    return false;
  }
  const auto& tt = traits(task.target_object);
  if (!tt.portable || tt.container || !layout.find(task.target_object)) return false;
  if (!layout.find(task.target_receptacle)) return false;

  switch (task.behavior) {
    case Behavior::Examine:
      if (task.target_receptacle != OC::Lamp) return false;
      break;
    case Behavior::Heat:
    case Behavior::Cool:
      if (!tt.cleanable || task.target_object == OC::Cloth) return false;
      [[fallthrough]];
    default:
      if (!traits(task.target_receptacle).surface) return false;
  }
  if (task.behavior == Behavior::Pick2Place) {
    if (!task.second_object || *task.second_object == task.target_object) return false;
    const auto& st = traits(*task.second_object);
    if (!st.portable || st.container || !layout.find(*task.second_object)) return false;
  } else if (task.second_object) {
    return false;
  }
  if (task.behavior == Behavior::Clean) {
    const auto id = layout.find(task.target_object);
    if (!layout.objects[*id].state.dirty) return false;
  }
  if (task.behavior == Behavior::Movable) {
    if (!layout.find(OC::Bowl)) return false;
  }
  // Every object must start on a surface the agent can reach.
  for (OC c : {task.target_object, task.second_object.value_or(task.target_object)}) {
    const auto parent = surface_of(layout, c);
    if (!parent || !traits(layout.objects[*parent].cls).surface) return false;
  }
  for (const auto& gc : task.goal_conditions) {
    if (condition_holds(layout, gc)) return false;
  }
  return true;
}

std::optional<TaskSpec> sample_task(const Layout& layout, Behavior behavior, Rng& rng) {
  if (!admissible(behavior, layout.env_type)) return std::nullopt;
  std::vector<TaskSpec> candidates;
  std::vector<OC> objects;
  for (const auto& o : layout.objects) {
    if (traits(o.cls).portable && !traits(o.cls).container) objects.push_back(o.cls);
  }
  std::vector<OC> receptacles;
  for (const auto& o : layout.objects) {
    if (traits(o.cls).surface || o.cls == OC::Lamp) receptacles.push_back(o.cls);
  }
  for (OC target : objects) {
    for (OC recep : receptacles) {
      if (behavior == Behavior::Pick2Place) {
        for (OC second : objects) {
          auto t = make_task(behavior, target, second, recep);
          if (task_admissible(layout, t)) candidates.push_back(std::move(t));
        }
      } else {
        auto t = make_task(behavior, target, std::nullopt, recep);
        if (task_admissible(layout, t)) candidates.push_back(std::move(t));
      }
    }
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[rng.uniform_index(candidates.size())];
}

SimState initial_state(const Layout& layout) {
  SimState s;
  s.layout = layout;
  s.agent_pos = layout.agent_start;
  s.heading = layout.start_heading;
  return s;
}

bool all_objects_reachable(const Layout& layout) {
  if (!layout.walkable(layout.agent_start)) return false;
  std::array<std::array<bool, kGridSize>, kGridSize> seen{};
  std::deque<Cell> frontier{layout.agent_start};
  seen[layout.agent_start.row][layout.agent_start.col] = true;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (int h = 0; h < 4; ++h) {
      const Cell n = ahead(c, static_cast<Heading>(h));
      if (layout.walkable(n) && !seen[n.row][n.col]) {
        seen[n.row][n.col] = true;
        frontier.push_back(n);
      }
    }
  }
  for (const auto& o : layout.objects) {
    if (!o.position) continue;
    bool ok = false;
    for (int h = 0; h < 4 && !ok; ++h) {
      const Cell n = ahead(*o.position, static_cast<Heading>(h));
      ok = in_grid(n) && seen[n.row][n.col];
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace minialfred::sim
