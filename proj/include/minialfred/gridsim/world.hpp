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
#include <optional>
#include <span>
#include <vector>

#include "minialfred/gridsim/types.hpp"
#include "minialfred/rng.hpp"

namespace minialfred::sim {

// Fixtures present (exactly once each) in every layout of an environment type.
std::span<const ObjectClass> fixtures_for(EnvType env);
// Portable objects present (exactly once each) in every layout of an environment type.
std::span<const ObjectClass> portables_for(EnvType env);

bool admissible(Behavior behavior, EnvType env);
std::vector<EnvType> admissible_envs(Behavior behavior);
std::vector<Behavior> admissible_behaviors(EnvType env);

// Deterministic in (env, style_seed, seen). Seen and unseen layouts draw
// style vectors from interleaved, disjoint value bins.
Layout generate_layout(EnvType env, int style_seed, bool seen);

// Same fixtures and style; portables re-scattered over surfaces and the agent
// start pose redrawn. Deterministic in (layout, placement_seed).
Layout rearrange(const Layout& layout, std::uint64_t placement_seed);

// Goal conditions implied by a behavior and its arguments.
std::vector<GoalCondition> goal_conditions_for(Behavior behavior, ObjectClass target,
                                               std::optional<ObjectClass> second,
                                               ObjectClass receptacle);

TaskSpec make_task(Behavior behavior, ObjectClass target, std::optional<ObjectClass> second,
                   ObjectClass receptacle);

// True when the task can be demonstrated in the layout: behavior admissible
// for the environment, all referenced objects present, and no goal condition
// already satisfied.
bool task_admissible(const Layout& layout, const TaskSpec& task);

// Uniformly picks among the admissible instantiations of `behavior` in the
// layout; empty when none exists for this placement.
std::optional<TaskSpec> sample_task(const Layout& layout, Behavior behavior, Rng& rng);

SimState initial_state(const Layout& layout);

// Cells from which the agent can walk to every object's neighbourhood.
bool all_objects_reachable(const Layout& layout);

}  // namespace minialfred::sim
