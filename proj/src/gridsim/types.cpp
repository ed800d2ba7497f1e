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

#include "minialfred/gridsim/types.hpp"

#include <algorithm>
#include <array>

namespace minialfred::sim {
namespace {

constexpr std::array<std::string_view, kNumEnvTypes> kEnvNames = {
    "Kitchen", "Livingroom", "Bedroom", "Bathroom"};
constexpr std::array<std::string_view, kNumBehaviors> kBehaviorNames = {
    "Examine", "Pick&Place", "Heat", "Cool", "Clean", "Pick2&Place", "Movable"};
constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Table", "CounterTop", "Shelf", "Bed",   "Sofa", "Microwave", "Fridge", "Sink",
    "Lamp",  "Apple",      "Tomato", "Mug", "CD",   "Cloth",     "Bowl"};
constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "MoveAhead", "RotateLeft", "RotateRight", "Pickup", "Put",
    "Open",      "Close",      "Toggle",      "Stop"};
constexpr std::array<std::string_view, 4> kHeadingNames = {"North", "East", "South", "West"};
constexpr std::array<std::string_view, kNumStateBits> kStateBitNames = {
    "open", "toggled_on", "hot", "cold", "clean", "dirty"};
constexpr std::array<std::string_view, 12> kEventNames = {
    "moved",  "blocked",    "rotated",     "picked_up", "placed",           "opened",
    "closed", "toggled_on", "toggled_off", "stopped",   "target_not_found", "not_permitted"};

template <class E, std::size_t N>
std::optional<E> parse_from(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr ClassTraits kSurface{.receptacle = true, .surface = true};
constexpr ClassTraits kCleanablePortable{.portable = true, .cleanable = true};

constexpr std::array<ClassTraits, kNumClasses> kTraits = {
    kSurface,                                                      // Table
    kSurface,                                                      // CounterTop
    kSurface,                                                      // Shelf
    kSurface,                                                      // Bed
    kSurface,                                                      // Sofa
    ClassTraits{.openable = true, .toggleable = true, .receptacle = true},  // Microwave
    ClassTraits{.openable = true, .receptacle = true},             // Fridge
    ClassTraits{.toggleable = true, .receptacle = true},           // Sink
    ClassTraits{.toggleable = true},                               // Lamp
    kCleanablePortable,                                            // Apple
    kCleanablePortable,                                            // Tomato
    kCleanablePortable,                                            // Mug
    ClassTraits{.portable = true},                                 // CD
    kCleanablePortable,                                            // Cloth
    ClassTraits{.portable = true, .receptacle = true, .container = true},  // Bowl
};

}  // namespace

std::string_view name(EnvType e) { return kEnvNames[static_cast<int>(e)]; }
std::string_view name(Behavior b) { return kBehaviorNames[static_cast<int>(b)]; }
std::string_view name(ObjectClass c) { return kClassNames[static_cast<int>(c)]; }
std::string_view name(Action a) { return kActionNames[static_cast<int>(a)]; }
std::string_view name(Heading h) { return kHeadingNames[static_cast<int>(h)]; }
std::string_view name(StateBit b) { return kStateBitNames[static_cast<int>(b)]; }
std::string_view name(Event e) { return kEventNames[static_cast<int>(e)]; }

std::optional<EnvType> parse_env_type(std::string_view s) {
  return parse_from<EnvType>(kEnvNames, s);
}
std::optional<Behavior> parse_behavior(std::string_view s) {
  return parse_from<Behavior>(kBehaviorNames, s);
}
std::optional<ObjectClass> parse_object_class(std::string_view s) {
  return parse_from<ObjectClass>(kClassNames, s);
}
std::optional<Action> parse_action(std::string_view s) { return parse_from<Action>(kActionNames, s); }
std::optional<Heading> parse_heading(std::string_view s) {
  return parse_from<Heading>(kHeadingNames, s);
}
std::optional<StateBit> parse_state_bit(std::string_view s) {
  return parse_from<StateBit>(kStateBitNames, s);
}

bool StateBits::get(StateBit b) const {
  switch (b) {
    case StateBit::Open: return open;
    case StateBit::ToggledOn: return toggled_on;
    case StateBit::Hot: return hot;
    case StateBit::Cold: return cold;
    case StateBit::Clean: return clean;
    case StateBit::Dirty: return dirty;
  }
  return false;
}

void StateBits::set(StateBit b, bool v) {
  switch (b) {
    case StateBit::Open: open = v; break;
    case StateBit::ToggledOn: toggled_on = v; break;
    case StateBit::Hot: hot = v; break;
    case StateBit::Cold: cold = v; break;
    case StateBit::Clean: clean = v; break;
    case StateBit::Dirty: dirty = v; break;
  }
}

const ClassTraits& traits(ObjectClass c) { return kTraits[static_cast<int>(c)]; }

std::vector<int> Layout::objects_at(Cell c) const {
  std::vector<int> ids;
  for (const auto& o : objects) {
    if (o.position == c) ids.push_back(o.id);
  }
  return ids;
}

std::optional<int> Layout::find(ObjectClass cls) const {
  for (const auto& o : objects) {
    if (o.cls == cls) return o.id;
  }
  return std::nullopt;
}

std::optional<int> Layout::parent_of(int id) const {
  for (const auto& o : objects) {
    if (std::find(o.contains.begin(), o.contains.end(), id) != o.contains.end()) return o.id;
  }
  return std::nullopt;
}

}  // namespace minialfred::sim
