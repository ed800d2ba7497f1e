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

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace minialfred::sim {

inline constexpr int kGridSize = 7;
inline constexpr int kStyleDim = 8;
inline constexpr int kStepBudget = 100;
inline constexpr int kMaxFailedInteractions = 10;
inline constexpr int kLayoutsPerPool = 30;

enum class EnvType : std::uint8_t { Kitchen, Livingroom, Bedroom, Bathroom };
inline constexpr int kNumEnvTypes = 4;

enum class Behavior : std::uint8_t {
  Examine,
  PickPlace,
  Heat,
  Cool,
  Clean,
  Pick2Place,
  Movable,
};
inline constexpr int kNumBehaviors = 7;

// Fixtures first (never portable), then portable objects.
enum class ObjectClass : std::uint8_t {
  Table,
  CounterTop,
  Shelf,
  Bed,
  Sofa,
  Microwave,
  Fridge,
  Sink,
  Lamp,
  Apple,
  Tomato,
  Mug,
  CD,
  Cloth,
  Bowl,
};
inline constexpr int kNumClasses = 15;

enum class Action : std::uint8_t {
  MoveAhead,
  RotateLeft,
  RotateRight,
  Pickup,
  Put,
  Open,
  Close,
  Toggle,
  Stop,
};
inline constexpr int kNumActions = 9;

enum class Heading : std::uint8_t { North, East, South, West };

enum class StateBit : std::uint8_t { Open, ToggledOn, Hot, Cold, Clean, Dirty };
inline constexpr int kNumStateBits = 6;

constexpr bool is_interaction(Action a) {
  return a == Action::Pickup || a == Action::Put || a == Action::Open ||
         a == Action::Close || a == Action::Toggle;
}

std::string_view name(EnvType e);
std::string_view name(Behavior b);
std::string_view name(ObjectClass c);
std::string_view name(Action a);
std::string_view name(Heading h);
std::string_view name(StateBit b);

std::optional<EnvType> parse_env_type(std::string_view s);
std::optional<Behavior> parse_behavior(std::string_view s);
std::optional<ObjectClass> parse_object_class(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Heading> parse_heading(std::string_view s);
std::optional<StateBit> parse_state_bit(std::string_view s);

struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

constexpr Cell ahead(Cell c, Heading h) {
  switch (h) {
    case Heading::North: return {c.row - 1, c.col};
    case Heading::East: return {c.row, c.col + 1};
    case Heading::South: return {c.row + 1, c.col};
    case Heading::West: return {c.row, c.col - 1};
  }
  return c;
}

constexpr Heading turn_left(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 3) % 4);
}
constexpr Heading turn_right(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 1) % 4);
}

constexpr bool in_grid(Cell c) {
  return c.row >= 0 && c.row < kGridSize && c.col >= 0 && c.col < kGridSize;
}

struct StateBits {
  bool open = false;
  bool toggled_on = false;
  bool hot = false;
  bool cold = false;
  bool clean = false;
  bool dirty = false;

  bool get(StateBit b) const;
  void set(StateBit b, bool v);
  friend bool operator==(const StateBits&, const StateBits&) = default;
};

struct ClassTraits {
  bool portable = false;
  bool openable = false;
  bool toggleable = false;
  // Accepts Put (surfaces, appliances, and the movable container).
  bool receptacle = false;
  // A portable object that can hold other portables.
  bool container = false;
  // Surfaces are where portables rest initially and where tasks deliver them.
  bool surface = false;
  bool cleanable = false;
};

const ClassTraits& traits(ObjectClass c);

struct ObjectInstance {
  int id = 0;
  ObjectClass cls = ObjectClass::Table;
  // Grid cell the object occupies or rests in; empty while carried.
  std::optional<Cell> position;
  StateBits state;
  std::vector<int> contains;
  // Set once the object has been picked up at least once.
  bool ever_picked = false;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

enum class Tile : std::uint8_t { Floor, Wall, Fixture };

struct Layout {
  EnvType env_type = EnvType::Kitchen;
  int layout_id = 0;
  bool seen = true;
  std::array<std::array<Tile, kGridSize>, kGridSize> grid{};
  std::vector<ObjectInstance> objects;
  std::array<double, kStyleDim> style{};
  Cell agent_start;
  Heading start_heading = Heading::North;

  Tile tile(Cell c) const { return in_grid(c) ? grid[c.row][c.col] : Tile::Wall; }
  bool walkable(Cell c) const { return tile(c) == Tile::Floor; }
  // Ids of objects whose position is `c`.
  std::vector<int> objects_at(Cell c) const;
  std::optional<int> find(ObjectClass cls) const;
  // Id of the object whose `contains` lists `id`, if any.
  std::optional<int> parent_of(int id) const;

  friend bool operator==(const Layout&, const Layout&) = default;
};

enum class Predicate : std::uint8_t { Picked, On, State };

struct GoalCondition {
  Predicate predicate = Predicate::Picked;
  ObjectClass subject = ObjectClass::Apple;
  // Receptacle for On.
  std::optional<ObjectClass> receptacle;
  // Bit for State.
  std::optional<StateBit> bit;

  friend bool operator==(const GoalCondition&, const GoalCondition&) = default;
};

struct TaskSpec {
  Behavior behavior = Behavior::PickPlace;
  ObjectClass target_object = ObjectClass::Apple;
  std::optional<ObjectClass> second_object;
  ObjectClass target_receptacle = ObjectClass::Table;
  std::vector<GoalCondition> goal_conditions;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct SimState {
  Layout layout;
  Cell agent_pos;
  Heading heading = Heading::North;
  std::optional<int> inventory;
  int step_count = 0;
  int failed_interactions = 0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

enum class Event : std::uint8_t {
  Moved,
  Blocked,
  Rotated,
  PickedUp,
  Placed,
  Opened,
  Closed,
  ToggledOn,
  ToggledOff,
  Stopped,
  TargetNotFound,
  NotPermitted,
};

std::string_view name(Event e);

struct StepOutcome {
  bool ok = false;
  Event event = Event::Blocked;
};

struct StepResult {
  SimState state;
  StepOutcome outcome;
};

// Misuse of the simulator API (as opposed to an in-world failure).
class SimError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace minialfred::sim
