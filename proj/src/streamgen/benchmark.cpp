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
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "minialfred/streamgen.hpp"

namespace minialfred::stream {
namespace {

using expert::Episode;
using expert::Split;

constexpr std::array<std::string_view, 2> kSetupNames = {"behavior-il", "environment-il"};

struct Job {
  std::size_t group;
  Split split;
  std::size_t index;
  Episode* slot;
};

class LayoutCache {
 public:
  LayoutCache() {
    for (int e = 0; e < sim::kNumEnvTypes; ++e) {
      for (int seen = 0; seen < 2; ++seen) {
        for (int id = 0; id < sim::kLayoutsPerPool; ++id) {
          layouts_[slot(static_cast<sim::EnvType>(e), id, seen != 0)] =
              sim::generate_layout(static_cast<sim::EnvType>(e), id, seen != 0);
        }
      }
    }
  }
  const sim::Layout& get(sim::EnvType env, int id, bool seen) const {
    return layouts_[slot(env, id, seen)];
  }

 private:
  static std::size_t slot(sim::EnvType env, int id, bool seen) {
    return (static_cast<std::size_t>(env) * 2 + (seen ? 1 : 0)) * sim::kLayoutsPerPool +
           static_cast<std::size_t>(id);
  }
  std::array<sim::Layout, sim::kNumEnvTypes * 2 * sim::kLayoutsPerPool> layouts_;
};

constexpr int kMaxAttempts = 64;

Episode generate_episode(const LayoutCache& cache, Setup setup, std::size_t key_index,
                         const Job& job, std::uint64_t seed) {
  const std::uint64_t base = mix_seed({seed, static_cast<std::uint64_t>(setup), key_index,
                                       static_cast<std::uint64_t>(job.split), job.index});
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed({base, static_cast<std::uint64_t>(attempt)}));
    sim::EnvType env;
    sim::Behavior behavior;
    if (setup == Setup::BehaviorIL) {
      behavior = static_cast<sim::Behavior>(key_index);
      const auto envs = sim::admissible_envs(behavior);
      env = envs[rng.uniform_index(envs.size())];
    } else {
      env = static_cast<sim::EnvType>(key_index);
      const auto behaviors = sim::admissible_behaviors(env);
      behavior = behaviors[rng.uniform_index(behaviors.size())];
    }
    const int layout_id = static_cast<int>(rng.uniform_index(sim::kLayoutsPerPool));
    const bool seen = job.split != Split::ValidUnseen;
    const std::uint64_t placement_seed = rng.next_u64();
    const auto layout = sim::rearrange(cache.get(env, layout_id, seen), placement_seed);
    if (!sim::all_objects_reachable(layout)) continue;
    const auto task = sim::sample_task(layout, behavior, rng);
    if (!task) continue;
    try {
      Episode e = expert::plan_demonstration(layout, *task, rng.next_u64());
      e.id = base;
      e.placement_seed = placement_seed;
      e.split = job.split;
      return e;
    } catch (const expert::PlanningError&) {
    }
  }
  throw BenchmarkError("could not generate an admissible episode for task index " +
                       std::to_string(key_index));
}

std::vector<Episode>& split_of(TaskGroup& g, Split s) {
  switch (s) {
    case Split::Train: return g.train;
    case Split::ValidSeen: return g.valid_seen;
    case Split::ValidUnseen: return g.valid_unseen;
  }
  return g.train;
}

}  // namespace

std::string_view name(Setup s) { return kSetupNames[static_cast<int>(s)]; }

std::optional<Setup> parse_setup(std::string_view s) {
  for (std::size_t i = 0; i < kSetupNames.size(); ++i) {
    if (kSetupNames[i] == s) return static_cast<Setup>(i);
  }
  return std::nullopt;
}

std::vector<TaskKey> task_keys(Setup setup) {
  std::vector<TaskKey> keys;
  if (setup == Setup::BehaviorIL) {
    for (int b = 0; b < sim::kNumBehaviors; ++b) {
      keys.emplace_back(sim::name(static_cast<sim::Behavior>(b)));
    }
  } else {
    for (int e = 0; e < sim::kNumEnvTypes; ++e) {
      keys.emplace_back(sim::name(static_cast<sim::EnvType>(e)));
    }
  }
  return keys;
}

int Counts::train_for(const TaskKey& key) const {
  const auto it = train_by_task.find(key);
  return it == train_by_task.end() ? train_per_task : it->second;
}

Counts Counts::defaults(Setup setup) {
  Counts c;
  if (setup == Setup::EnvironmentIL) {
    // Kitchens dominate, as in the household source data.
    c.train_by_task = {{"Kitchen", 300}, {"Livingroom", 180}, {"Bedroom", 150}, {"Bathroom", 150}};
  }
  return c;
}

const TaskGroup& Benchmark::group(const TaskKey& key) const {
  for (const auto& g : groups) {
    if (g.key == key) return g;
  }
  throw BenchmarkError("unknown task key: " + key);
}

std::size_t Benchmark::train_size() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.train.size();
  return n;
}

Benchmark build_benchmark(Setup setup, const Counts& counts, std::uint64_t seed,
                          unsigned threads) {
  const auto keys = task_keys(setup);
  for (const auto& [key, n] : counts.train_by_task) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw BenchmarkError("count given for unknown task key: " + key);
    }
    (void)n;
  }
  if (counts.valid_seen_per_task < 0 || counts.valid_unseen_per_task < 0) {
    throw BenchmarkError("validation counts must be non-negative");
  }
  Benchmark b;
  b.setup = setup;
  b.seed = seed;
  b.counts = counts;
  b.groups.resize(keys.size());
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    TaskGroup& g = b.groups[k];
    g.key = keys[k];
    const int n_train = counts.train_for(g.key);
    if (n_train <= 0) throw BenchmarkError("task " + g.key + " needs at least one training episode");
    const std::array<std::pair<Split, int>, 3> sizes = {{
        {Split::Train, n_train},
        {Split::ValidSeen, counts.valid_seen_per_task},
        {Split::ValidUnseen, counts.valid_unseen_per_task},
    }};
    for (const auto& [split, n] : sizes) {
      auto& dst = split_of(g, split);
      dst.resize(static_cast<std::size_t>(n));
    }
    for (const auto& [split, n] : sizes) {
      auto& dst = split_of(g, split);
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        jobs.push_back({k, split, i, &dst[i]});
      }
    }
  }

  static const LayoutCache cache;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        *jobs[j].slot = generate_episode(cache, setup, jobs[j].group, jobs[j], seed);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, threads);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::set<std::uint64_t> ids;
  for (const auto& g : b.groups) {
    for (const auto* split : {&g.train, &g.valid_seen, &g.valid_unseen}) {
      for (const auto& e : *split) {
        if (!ids.insert(e.id).second) throw BenchmarkError("episode id collision");
      }
    }
  }
  if (setup == Setup::EnvironmentIL && counts.balance) balance_environments(b);
  return b;
}

void balance_environments(Benchmark& benchmark) {
  for (Split split : {Split::Train, Split::ValidSeen, Split::ValidUnseen}) {
    std::vector<std::vector<Episode>> groups;
    for (auto& g : benchmark.groups) groups.push_back(std::move(split_of(g, split)));
    groups = balance_groups(std::move(groups),
                            mix_seed({benchmark.seed, 0xba1a, static_cast<std::uint64_t>(split)}));
    for (std::size_t i = 0; i < groups.size(); ++i) {
      split_of(benchmark.groups[i], split) = std::move(groups[i]);
    }
  }
}

}  // namespace minialfred::stream
