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
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "minialfred/gridsim.hpp"

namespace minialfred::sim {
namespace {

int count_class(const Layout& layout, ObjectClass cls) {
  return static_cast<int>(std::count_if(layout.objects.begin(), layout.objects.end(),
                                        [&](const ObjectInstance& o) { return o.cls == cls; }));
}

// Puts the agent on a floor cell next to the first object of `cls` and turns
// it to face that object.
SimState facing(SimState s, ObjectClass cls) {
  const auto id = s.layout.find(cls);
  const Cell target = *s.layout.objects[*id].position;
  for (int h = 0; h < 4; ++h) {
    const auto heading = static_cast<Heading>(h);
    // Standing at `target - dir(heading)` and facing `heading`.
    const Cell back = ahead(target, turn_right(turn_right(heading)));
    if (s.layout.walkable(back)) {
      s.agent_pos = back;
      s.heading = heading;
      return s;
    }
  }
  ADD_FAILURE() << "no free cell next to " << name(cls);
  return s;
}

int id_of(const SimState& s, ObjectClass cls) { return *s.layout.find(cls); }

SimState kitchen_with_apple_in_hand() {
  SimState s = initial_state(generate_layout(EnvType::Kitchen, 3, true));
  s = facing(s, s.layout.objects[*s.layout.parent_of(id_of(s, ObjectClass::Apple))].cls);
  auto r = step(s, Action::Pickup, ObjectClass::Apple);
  EXPECT_TRUE(r.outcome.ok);
  return r.state;
}

TEST(GenerateLayout, IsDeterministic) {
  EXPECT_EQ(generate_layout(EnvType::Kitchen, 0, true), generate_layout(EnvType::Kitchen, 0, true));
}

TEST(GenerateLayout, SeenAndUnseenStylesDifferEverywhere) {
  for (int seed = 0; seed < kLayoutsPerPool; ++seed) {
    const auto a = generate_layout(EnvType::Kitchen, seed, true);
    const auto b = generate_layout(EnvType::Kitchen, seed, false);
    for (int d = 0; d < kStyleDim; ++d) EXPECT_NE(a.style[d], b.style[d]);
  }
}

TEST(GenerateLayout, StylePoolsAreDisjointBins) {
  for (int env = 0; env < kNumEnvTypes; ++env) {
    for (int seed = 0; seed < kLayoutsPerPool; ++seed) {
      for (bool seen : {true, false}) {
        const auto l = generate_layout(static_cast<EnvType>(env), seed, seen);
        for (double v : l.style) {
          const int bin = static_cast<int>(v * 20.0);
          EXPECT_EQ(bin % 2, seen ? 0 : 1);
        }
      }
    }
  }
}

TEST(GenerateLayout, BathroomHasOneSinkAndNoMicrowave) {
  // Bathroom fixtures: Sink, CounterTop, Shelf.
  const auto l = generate_layout(EnvType::Bathroom, 7, true);
  EXPECT_EQ(count_class(l, ObjectClass::Sink), 1);
  EXPECT_EQ(count_class(l, ObjectClass::Microwave), 0);
  EXPECT_EQ(count_class(l, ObjectClass::CounterTop), 1);
  EXPECT_EQ(count_class(l, ObjectClass::Shelf), 1);
}

TEST(GenerateLayout, InvariantsHoldAcrossPools) {
  for (int env = 0; env < kNumEnvTypes; ++env) {
    const auto e = static_cast<EnvType>(env);
    for (int seed = 0; seed < kLayoutsPerPool; ++seed) {
      for (bool seen : {true, false}) {
        const auto l = generate_layout(e, seed, seen);
        for (ObjectClass f : fixtures_for(e)) EXPECT_EQ(count_class(l, f), 1);
        EXPECT_TRUE(l.walkable(l.agent_start));
        EXPECT_TRUE(all_objects_reachable(l));
        for (std::size_t i = 0; i < l.objects.size(); ++i) {
          EXPECT_EQ(l.objects[i].id, static_cast<int>(i));
          if (traits(l.objects[i].cls).portable) {
            EXPECT_FALSE(l.objects[i].state.open);
          }
        }
        const auto r = rearrange(l, 99);
        EXPECT_TRUE(all_objects_reachable(r));
      }
    }
  }
}

TEST(Admissibility, MatchesEnvironmentTable) {
  EXPECT_EQ(admissible_envs(Behavior::Heat), std::vector<EnvType>{EnvType::Kitchen});
  EXPECT_EQ(admissible_envs(Behavior::Cool), std::vector<EnvType>{EnvType::Kitchen});
  EXPECT_EQ(admissible_envs(Behavior::Clean),
            (std::vector<EnvType>{EnvType::Kitchen, EnvType::Bathroom}));
  EXPECT_EQ(admissible_envs(Behavior::Examine),
            (std::vector<EnvType>{EnvType::Livingroom, EnvType::Bedroom}));
  EXPECT_EQ(admissible_envs(Behavior::PickPlace).size(), 4u);
}

TEST(Step, MoveAheadIntoWallIsBlocked) {
  SimState s = initial_state(generate_layout(EnvType::Livingroom, 1, true));
  s.agent_pos = {3, 3};
  s.heading = Heading::North;
  // Walk until blocked; the final attempt must leave the pose unchanged.
  for (int i = 0; i < 4; ++i) s = step(s, Action::MoveAhead, std::nullopt).state;
  const Cell before = s.agent_pos;
  const auto r = step(s, Action::MoveAhead, std::nullopt);
  EXPECT_FALSE(r.outcome.ok);
  EXPECT_EQ(r.outcome.event, Event::Blocked);
  EXPECT_EQ(r.state.agent_pos, before);
  EXPECT_EQ(r.state.failed_interactions, 0);
}

TEST(Step, PutIntoOpenMicrowave) {
  SimState s = facing(kitchen_with_apple_in_hand(), ObjectClass::Microwave);
  s = step(s, Action::Open, ObjectClass::Microwave).state;
  const auto r = step(s, Action::Put, ObjectClass::Microwave);
  ASSERT_TRUE(r.outcome.ok);
  EXPECT_FALSE(r.state.inventory);
  const auto& mw = r.state.layout.objects[id_of(r.state, ObjectClass::Microwave)];
  EXPECT_EQ(mw.contains, std::vector<int>{id_of(r.state, ObjectClass::Apple)});
  EXPECT_EQ(r.state.layout.objects[id_of(r.state, ObjectClass::Apple)].position, mw.position);
}

TEST(Step, PutIntoClosedMicrowaveFails) {
  SimState s = facing(kitchen_with_apple_in_hand(), ObjectClass::Microwave);
  const auto r = step(s, Action::Put, ObjectClass::Microwave);
  EXPECT_FALSE(r.outcome.ok);
  EXPECT_EQ(r.state.failed_interactions, 1);
  EXPECT_TRUE(r.state.inventory);
}

TEST(Step, ToggleMicrowaveHeatsContents) {
  SimState s = facing(kitchen_with_apple_in_hand(), ObjectClass::Microwave);
  s = step(s, Action::Open, ObjectClass::Microwave).state;
  s = step(s, Action::Put, ObjectClass::Microwave).state;
  s = step(s, Action::Close, ObjectClass::Microwave).state;
  const auto r = step(s, Action::Toggle, ObjectClass::Microwave);
  ASSERT_TRUE(r.outcome.ok);
  EXPECT_EQ(r.outcome.event, Event::ToggledOn);
  const auto& apple = r.state.layout.objects[id_of(r.state, ObjectClass::Apple)];
  EXPECT_TRUE(apple.state.hot);
  EXPECT_FALSE(apple.state.cold);
}

TEST(Step, ClosingFridgeCoolsAndClearsHeat) {
  SimState s = facing(kitchen_with_apple_in_hand(), ObjectClass::Fridge);
  s.layout.objects[id_of(s, ObjectClass::Apple)].state.hot = true;
  s = step(s, Action::Open, ObjectClass::Fridge).state;
  s = step(s, Action::Put, ObjectClass::Fridge).state;
  // Closed fridge hides its contents.
  s = step(s, Action::Close, ObjectClass::Fridge).state;
  const auto& apple = s.layout.objects[id_of(s, ObjectClass::Apple)];
  EXPECT_TRUE(apple.state.cold);
  EXPECT_FALSE(apple.state.hot);
  const auto r = step(s, Action::Pickup, ObjectClass::Apple);
  EXPECT_FALSE(r.outcome.ok);
  EXPECT_EQ(r.outcome.event, Event::TargetNotFound);
}

TEST(Step, SinkCleansContents) {
  SimState s = facing(kitchen_with_apple_in_hand(), ObjectClass::Sink);
  s = step(s, Action::Put, ObjectClass::Sink).state;
  s = step(s, Action::Toggle, ObjectClass::Sink).state;
  const auto& apple = s.layout.objects[id_of(s, ObjectClass::Apple)];
  EXPECT_TRUE(apple.state.clean);
  EXPECT_FALSE(apple.state.dirty);
}

TEST(Step, ContainerStackingPicksIntoHeldBowl) {
  SimState s = initial_state(generate_layout(EnvType::Kitchen, 5, true));
  const int bowl = id_of(s, ObjectClass::Bowl);
  s = facing(s, s.layout.objects[*s.layout.parent_of(bowl)].cls);
  s = step(s, Action::Pickup, ObjectClass::Bowl).state;
  ASSERT_EQ(s.inventory, bowl);
  const int apple = id_of(s, ObjectClass::Apple);
  s = facing(s, s.layout.objects[*s.layout.parent_of(apple)].cls);
  const auto r = step(s, Action::Pickup, ObjectClass::Apple);
  ASSERT_TRUE(r.outcome.ok);
  EXPECT_EQ(r.state.inventory, bowl);
  EXPECT_EQ(r.state.layout.objects[bowl].contains, std::vector<int>{apple});
  EXPECT_FALSE(r.state.layout.objects[apple].position);
}

TEST(Step, BudgetAndArgumentMisuseAreCallerErrors) {
  SimState s = initial_state(generate_layout(EnvType::Kitchen, 0, true));
  EXPECT_THROW(step(s, Action::Pickup, std::nullopt), SimError);
  EXPECT_THROW(step(s, Action::MoveAhead, ObjectClass::Apple), SimError);
  s.step_count = kStepBudget;
  EXPECT_THROW(step(s, Action::RotateLeft, std::nullopt), SimError);
}

TEST(Step, IsPure) {
  const SimState s = initial_state(generate_layout(EnvType::Bedroom, 2, true));
  const SimState copy = s;
  const auto a = step(s, Action::MoveAhead, std::nullopt);
  const auto b = step(s, Action::MoveAhead, std::nullopt);
  EXPECT_EQ(s, copy);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.outcome.ok, b.outcome.ok);
}

// Random legal action sequences: no object is ever hot and cold, carried
// objects never have a position, and everything else sits in exactly one place.
TEST(Step, MechanicsSoundUnderRandomPlay) {
  Rng rng(17);
  for (int episode = 0; episode < 200; ++episode) {
    const auto env = static_cast<EnvType>(episode % kNumEnvTypes);
    SimState s = initial_state(rearrange(generate_layout(env, episode % 30, true), episode));
    while (s.step_count < kStepBudget) {
      const auto a = static_cast<Action>(rng.uniform_index(kNumActions));
      std::optional<ObjectClass> target;
      if (is_interaction(a)) {
        // Bias toward classes that actually exist so interactions happen.
        target = s.layout.objects[rng.uniform_index(s.layout.objects.size())].cls;
      }
      s = step(s, a, target).state;
      for (const auto& o : s.layout.objects) {
        EXPECT_FALSE(o.state.hot && o.state.cold);
        const auto parent = s.layout.parent_of(o.id);
        const bool carried_chain =
            s.inventory && (o.id == *s.inventory || (parent && !s.layout.objects[*parent].position));
        if (traits(o.cls).portable) {
          EXPECT_EQ(o.position.has_value(), !carried_chain);
          EXPECT_FALSE(o.state.open);
        }
      }
      if (s.inventory) {
        EXPECT_FALSE(s.layout.parent_of(*s.inventory));
      }
    }
  }
}

TEST(GoalSatisfaction, InitialStateIsUnsatisfied) {
  Rng rng(3);
  for (int b = 0; b < kNumBehaviors; ++b) {
    const auto behavior = static_cast<Behavior>(b);
    for (EnvType env : admissible_envs(behavior)) {
      for (int seed = 0; seed < 10; ++seed) {
        const auto layout = rearrange(generate_layout(env, seed, true), seed);
        const auto task = sample_task(layout, behavior, rng);
        if (!task) continue;
        const auto g = goal_satisfaction(initial_state(layout), *task);
        EXPECT_EQ(g.satisfied, 0);
        EXPECT_EQ(g.total, static_cast<int>(task->goal_conditions.size()));
      }
    }
  }
}

TEST(GoalSatisfaction, HeatAppleOnTable) {
  SimState s = kitchen_with_apple_in_hand();
  const auto task = make_task(Behavior::Heat, ObjectClass::Apple, std::nullopt, ObjectClass::Table);
  ASSERT_EQ(task.goal_conditions.size(), 3u);
  EXPECT_EQ(goal_satisfaction(s, task), (GoalProgress{1, 3}));
  s.layout.objects[id_of(s, ObjectClass::Apple)].state.hot = true;
  s = facing(s, ObjectClass::Table);
  s = step(s, Action::Put, ObjectClass::Table).state;
  const auto g = goal_satisfaction(s, task);
  EXPECT_EQ(g, (GoalProgress{3, 3}));
  EXPECT_TRUE(g.success());
}

TEST(GoalSatisfaction, PickTwoWithOnePlacedIsPartial) {
  SimState s = kitchen_with_apple_in_hand();
  const auto task =
      make_task(Behavior::Pick2Place, ObjectClass::Apple, ObjectClass::Tomato, ObjectClass::Table);
  s = facing(s, ObjectClass::Table);
  s = step(s, Action::Put, ObjectClass::Table).state;
  const auto g = goal_satisfaction(s, task);
  EXPECT_EQ(g.total, 4);
  EXPECT_LT(g.satisfied, g.total);
  EXPECT_FALSE(g.success());
}

TEST(Observe, IsPure) {
  const SimState s = initial_state(generate_layout(EnvType::Kitchen, 4, true));
  const std::vector<int> instr = {3, 4, 5};
  EXPECT_EQ(observe(s, instr), observe(s, instr));
  EXPECT_EQ(observe(s, instr).size(), static_cast<std::size_t>(kFeatureDim));
}

TEST(Observe, WindowIgnoresCellsOutsideIt) {
  SimState s = initial_state(generate_layout(EnvType::Kitchen, 4, true));
  s.agent_pos = {3, 3};
  s.heading = Heading::North;
  SimState t = s;
  // Row 4 is behind the agent; change an object's state there or anywhere
  // off-window by dirtying every object not in the window.
  std::set<Cell> window;
  for (int d = 1; d <= 3; ++d) {
    for (int l = -1; l <= 1; ++l) window.insert(window_cell(s.agent_pos, s.heading, d, l));
  }
  for (auto& o : t.layout.objects) {
    if (o.position && !window.count(*o.position)) o.state.toggled_on = !o.state.toggled_on;
  }
  const auto a = observe(s, {});
  const auto b = observe(t, {});
  EXPECT_TRUE(std::equal(a.begin(), a.begin() + kWindowDim, b.begin()));
}

// Oracle: window slots enumerated by hand for each heading frame.
TEST(Observe, WindowCellsFollowHeadingFrame) {
  const Cell p{3, 3};
  for (int d = 1; d <= 3; ++d) {
    for (int l = -1; l <= 1; ++l) {
      EXPECT_EQ(window_cell(p, Heading::North, d, l), (Cell{3 - d, 3 + l}));
      EXPECT_EQ(window_cell(p, Heading::East, d, l), (Cell{3 + l, 3 + d}));
      EXPECT_EQ(window_cell(p, Heading::South, d, l), (Cell{3 + d, 3 - l}));
      EXPECT_EQ(window_cell(p, Heading::West, d, l), (Cell{3 - l, 3 - d}));
    }
  }
}

Layout rotate_clockwise(const Layout& l) {
  auto rot = [](Cell c) { return Cell{c.col, kGridSize - 1 - c.row}; };
  Layout out = l;
  for (int r = 0; r < kGridSize; ++r) {
    for (int c = 0; c < kGridSize; ++c) {
      const Cell d = rot({r, c});
      out.grid[d.row][d.col] = l.grid[r][c];
    }
  }
  for (auto& o : out.objects) {
    if (o.position) o.position = rot(*o.position);
  }
  out.agent_start = rot(l.agent_start);
  out.start_heading = turn_right(l.start_heading);
  return out;
}

TEST(Observe, RotatingRoomAndAgentTogetherKeepsWindow) {
  SimState s = initial_state(generate_layout(EnvType::Kitchen, 8, true));
  for (int h = 0; h < 4; ++h) {
    s.heading = static_cast<Heading>(h);
    SimState r = initial_state(rotate_clockwise(s.layout));
    r.agent_pos = Cell{s.agent_pos.col, kGridSize - 1 - s.agent_pos.row};
    r.heading = turn_right(s.heading);
    const auto a = observe(s, {});
    const auto b = observe(r, {});
    EXPECT_TRUE(std::equal(a.begin(), a.begin() + kWindowDim, b.begin()));
    // Absolute heading block differs.
    EXPECT_FALSE(std::equal(a.begin() + kWindowDim, a.begin() + kWindowDim + kHeadingDim,
                            b.begin() + kWindowDim));
  }
}

TEST(Observe, SymmetricRoomLooksTheSameAfterQuarterTurn) {
  Layout l = generate_layout(EnvType::Bedroom, 0, true);
  // Replace the fixtures with a four-fold symmetric arrangement of shelves.
  l.objects.clear();
  for (auto& row : l.grid) {
    for (auto& t : row) {
      if (t == Tile::Fixture) t = Tile::Floor;
    }
  }
  const Cell spots[] = {{1, 3}, {3, 5}, {5, 3}, {3, 1}};
  for (int i = 0; i < 4; ++i) {
    ObjectInstance shelf;
    shelf.id = i;
    shelf.cls = ObjectClass::Shelf;
    shelf.position = spots[i];
    l.objects.push_back(shelf);
    l.grid[spots[i].row][spots[i].col] = Tile::Fixture;
  }
  SimState s = initial_state(l);
  s.agent_pos = {3, 3};
  s.heading = Heading::North;
  SimState t = s;
  t.heading = Heading::East;
  const auto a = observe(s, {});
  const auto b = observe(t, {});
  EXPECT_TRUE(std::equal(a.begin(), a.begin() + kWindowDim, b.begin()));
}

TEST(Observe, InstructionTokensArePassedThroughAndPadded) {
  const SimState s = initial_state(generate_layout(EnvType::Kitchen, 0, true));
  const std::vector<int> instr = {7, 2, 9};
  const auto v = observe(s, instr);
  EXPECT_EQ(v[kDenseDim + 0], 7.0);
  EXPECT_EQ(v[kDenseDim + 1], 2.0);
  EXPECT_EQ(v[kDenseDim + 2], 9.0);
  for (int i = 3; i < kMaxInstructionTokens; ++i) EXPECT_EQ(v[kDenseDim + i], kPadToken);
}

TEST(Serialize, LayoutAndTaskRoundTrip) {
  Rng rng(11);
  for (int env = 0; env < kNumEnvTypes; ++env) {
    for (int seed = 0; seed < 5; ++seed) {
      const auto l = rearrange(generate_layout(static_cast<EnvType>(env), seed, seed % 2 == 0), 7);
      std::stringstream ss;
      write_layout(ss, l);
      EXPECT_EQ(read_layout(ss), l);
      for (Behavior b : admissible_behaviors(l.env_type)) {
        const auto task = sample_task(l, b, rng);
        if (!task) continue;
        std::stringstream ts;
        write_task(ts, *task);
        EXPECT_EQ(read_task(ts), *task);
      }
    }
  }
}

TEST(Serialize, RejectsUnknownVersion) {
  std::stringstream ss;
  ss << R"({"record":"task","version":99})" << '\n';
  EXPECT_THROW(read_task(ss), std::runtime_error);
}

}  // namespace
}  // namespace minialfred::sim
