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
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "minialfred/gridsim.hpp"

namespace minialfred::expert {

// Instruction vocabulary (version 1). Id 0 is padding.
inline constexpr int kVocabularyVersion = 1;
std::span<const std::string_view> vocabulary();
int vocabulary_size();
// Throws std::out_of_range for words outside the vocabulary.
int token_id(std::string_view word);
std::vector<int> instruction_for(const sim::TaskSpec& task);
std::string instruction_text(std::span<const int> tokens);

enum class Split : std::uint8_t { Train, ValidSeen, ValidUnseen };
std::string_view name(Split s);
std::optional<Split> parse_split(std::string_view s);

struct DemoStep {
  sim::FeatureVector features;
  sim::Action action = sim::Action::Stop;
  // Present iff `action` is an interaction.
  std::optional<sim::ObjectClass> target_class;
  double progress = 0.0;
};

// The part of an episode a learner may see: instruction and per-step labels.
struct Demonstration {
  std::vector<int> instruction;
  std::vector<DemoStep> steps;

  std::size_t interaction_count() const;
};

struct Episode {
  std::uint64_t id = 0;
  std::shared_ptr<const Demonstration> demo;
  sim::TaskSpec task;
  sim::EnvType env_type = sim::EnvType::Kitchen;
  int layout_id = 0;
  bool seen = true;
  std::uint64_t placement_seed = 0;
  Split split = Split::Train;
  // Seed handed to the planner; recorded for provenance.
  std::uint64_t seed = 0;

  sim::Behavior behavior() const { return task.behavior; }
  // Rebuilds the starting layout from (env, layout_id, seen, placement_seed).
  sim::Layout initial_layout() const;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Pose {
  sim::Cell cell;
  sim::Heading heading = sim::Heading::North;
  friend bool operator==(const Pose&, const Pose&) = default;
};

// Breadth-first search over (cell, heading). Among equally short plans the
// one found first when expanding MoveAhead, RotateLeft, RotateRight in that
// order is returned. Throws PlanningError when the pose is unreachable.
std::vector<sim::Action> shortest_path_actions(const sim::SimState& state, Pose goal);
std::vector<sim::Action> shortest_path_to_any(const sim::SimState& state,
                                              std::span<const Pose> goals);

// Floor poses from which `target` is the faced cell.
std::vector<Pose> interaction_poses(const sim::Layout& layout, sim::Cell target);

// Scripted demonstration that replays to success with no failed
// interactions. Throws PlanningError for inadmissible tasks.
Episode plan_demonstration(const sim::Layout& layout, const sim::TaskSpec& task,
                           std::uint64_t seed);

// progress[t] = (t + 1) / T.
void label_progress(Demonstration& demo);

struct ReplayResult {
  sim::SimState final_state;
  sim::GoalProgress goals;
  int failed_interactions = 0;
};
// Executes the demonstration's actions from the episode's initial layout.
ReplayResult replay(const Episode& episode);

inline constexpr int kEpisodeSchemaVersion = 1;
// One JSON object per line; feature vectors are flat numeric arrays.
void write_episode(std::ostream& out, const Episode& episode);
// Returns nullopt at end of input.
std::optional<Episode> read_episode(std::istream& in);

}  // namespace minialfred::expert
