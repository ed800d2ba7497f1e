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

#include <optional>
#include <span>
#include <vector>

#include "minialfred/gridsim/types.hpp"

namespace minialfred::sim {

// Pure transition. Throws SimError when the step budget is already spent or
// the target argument does not match the action kind.
StepResult step(const SimState& state, Action action, std::optional<ObjectClass> target);

// Objects the agent could address in `cell`: the fixture, its contents when
// it is not a closed container, and the contents of any open-topped
// container resting there.
std::vector<int> accessible_objects(const Layout& layout, Cell cell);

struct GoalProgress {
  int satisfied = 0;
  int total = 0;
  bool success() const { return total > 0 && satisfied == total; }
  friend bool operator==(const GoalProgress&, const GoalProgress&) = default;
};

bool condition_holds(const Layout& layout, const GoalCondition& condition);
GoalProgress goal_satisfaction(const SimState& state, const TaskSpec& task);

}  // namespace minialfred::sim
