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

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minialfred/expert.hpp"
#include "minialfred/rng.hpp"

namespace minialfred::stream {

enum class Setup : std::uint8_t { BehaviorIL, EnvironmentIL };
std::string_view name(Setup s);
std::optional<Setup> parse_setup(std::string_view s);

// Behavior names ("Heat", "Pick2&Place", ...) or environment names
// ("Kitchen", ...) depending on the setup.
using TaskKey = std::string;
std::vector<TaskKey> task_keys(Setup setup);

struct Counts {
  // Training episodes per task; keys missing here use `train_per_task`.
  int train_per_task = 300;
  std::map<TaskKey, int> train_by_task;
  int valid_seen_per_task = 15;
  int valid_unseen_per_task = 15;
  // Subsample Environment-IL groups to the smallest group size.
  bool balance = true;

  int train_for(const TaskKey& key) const;
  static Counts defaults(Setup setup);
};

struct TaskGroup {
  TaskKey key;
  std::vector<expert::Episode> train;
  std::vector<expert::Episode> valid_seen;
  std::vector<expert::Episode> valid_unseen;
};

struct Benchmark {
  Setup setup = Setup::BehaviorIL;
  std::uint64_t seed = 0;
  Counts counts;
  // In canonical task-key order.
  std::vector<TaskGroup> groups;

  const TaskGroup& group(const TaskKey& key) const;
  std::size_t train_size() const;
};

class BenchmarkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic in (setup, counts, seed). Generation runs on `threads`
// workers; the result does not depend on the thread count.
Benchmark build_benchmark(Setup setup, const Counts& counts, std::uint64_t seed,
                          unsigned threads = 1);

// Uniformly subsamples every group to the smallest group size, keeping the
// surviving items in their original order. Equal-sized input is returned
// unchanged.
template <class T>
std::vector<std::vector<T>> balance_groups(std::vector<std::vector<T>> groups, std::uint64_t seed) {
  if (groups.empty()) return groups;
  std::size_t smallest = groups.front().size();
  for (const auto& g : groups) smallest = std::min(smallest, g.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    if (g.size() == smallest) continue;
    std::vector<std::size_t> idx(g.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix_seed({seed, gi}));
    for (std::size_t i = 0; i < smallest; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(smallest);
    std::sort(idx.begin(), idx.end());
    std::vector<T> kept;
    kept.reserve(smallest);
    for (std::size_t i : idx) kept.push_back(std::move(g[i]));
    g = std::move(kept);
  }
  return groups;
}

// Applies balance_groups to the training, seen and unseen splits.
void balance_environments(Benchmark& benchmark);

struct Ordering {
  enum class Source : std::uint8_t { Explicit, SeededRandom };
  std::vector<TaskKey> keys;
  Source source = Source::Explicit;
};

// Throws BenchmarkError when `keys` is not a permutation of the setup's tasks.
Ordering make_task_ordering(Setup setup, std::vector<TaskKey> keys);
Ordering make_task_ordering(Setup setup, std::uint64_t seed);
// The five reference orderings per setup; index in [1, 5].
Ordering preset_ordering(Setup setup, int index);

// What a learner receives from the stream. Carries no task identity.
struct StreamRecord {
  std::size_t index = 0;
  std::shared_ptr<const expert::Demonstration> demo;
};

// Single-pass iterator over a benchmark's training episodes: every episode of
// the first task (shuffled), then the second task, and so on.
class EpisodeStream {
 public:
  EpisodeStream(const Benchmark& benchmark, const Ordering& ordering, std::uint64_t shuffle_seed);
  EpisodeStream(const EpisodeStream&) = delete;
  EpisodeStream& operator=(const EpisodeStream&) = delete;
  EpisodeStream(EpisodeStream&&) = default;
  EpisodeStream& operator=(EpisodeStream&&) = default;

  // nullopt once the stream is exhausted.
  std::optional<StreamRecord> next();
  std::size_t size() const { return order_.size(); }
  std::size_t remaining() const { return order_.size() - pos_; }

  // Harness-side view: number of episodes emitted when each task finishes.
  // Learners never see this.
  const std::vector<std::size_t>& task_ends() const { return task_ends_; }
  // Episode ids in emission order, for reproducibility checks.
  std::vector<std::uint64_t> episode_ids() const;

 private:
  std::vector<const expert::Episode*> order_;
  std::vector<std::size_t> task_ends_;
  std::size_t pos_ = 0;
};

// Per-task shuffle used by EpisodeStream.
std::vector<std::size_t> task_shuffle(std::size_t n, std::uint64_t shuffle_seed,
                                      const TaskKey& key);

inline constexpr int kManifestSchemaVersion = 1;
// Header record followed by one record per (task, split) listing episode ids.
void write_manifest(std::ostream& out, const Benchmark& benchmark);

struct ManifestEntry {
  TaskKey key;
  expert::Split split = expert::Split::Train;
  std::vector<std::uint64_t> episode_ids;
};
struct Manifest {
  Setup setup = Setup::BehaviorIL;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
};
Manifest read_manifest(std::istream& in);

// Every episode of the benchmark, one JSON line each.
void write_episodes(std::ostream& out, const Benchmark& benchmark);

}  // namespace minialfred::stream
