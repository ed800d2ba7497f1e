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

#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "minialfred/streamgen.hpp"

namespace minialfred::stream {
namespace {

using expert::Split;

Counts small_counts(int train) {
  Counts c;
  c.train_per_task = train;
  c.valid_seen_per_task = 3;
  c.valid_unseen_per_task = 3;
  return c;
}

const Benchmark& behavior_bench() {
  static const Benchmark b = build_benchmark(Setup::BehaviorIL, small_counts(12), 5);
  return b;
}

std::vector<std::vector<int>> groups_of_sizes(std::initializer_list<int> sizes) {
  std::vector<std::vector<int>> g;
  int next = 0;
  for (int n : sizes) {
    g.emplace_back(n);
    std::iota(g.back().begin(), g.back().end(), next);
    next += n;
  }
  return g;
}

TEST(BenchmarkTest, GroupCounts) {
  EXPECT_EQ(behavior_bench().groups.size(), 7u);
  const auto env = build_benchmark(Setup::EnvironmentIL, small_counts(4), 5);
  EXPECT_EQ(env.groups.size(), 4u);
}

TEST(BenchmarkTest, GroupsAreDisjoint) {
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (const auto& g : behavior_bench().groups) {
    for (const auto* eps : {&g.train, &g.valid_seen, &g.valid_unseen}) {
      for (const auto& e : *eps) {
        seen.insert(e.id);
        ++total;
      }
    }
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(BenchmarkTest, EpisodesBelongToTheirGroup) {
  for (const auto& g : behavior_bench().groups) {
    EXPECT_EQ(g.train.size(), 12u);
    EXPECT_EQ(g.valid_seen.size(), 3u);
    EXPECT_EQ(g.valid_unseen.size(), 3u);
    for (const auto* eps : {&g.train, &g.valid_seen, &g.valid_unseen}) {
      for (const auto& e : *eps) {
        EXPECT_EQ(sim::name(e.behavior()), g.key);
        EXPECT_TRUE(sim::admissible(e.behavior(), e.env_type));
      }
    }
    for (const auto& e : g.train) EXPECT_TRUE(e.seen && e.split == Split::Train);
    for (const auto& e : g.valid_seen) EXPECT_TRUE(e.seen && e.split == Split::ValidSeen);
    for (const auto& e : g.valid_unseen) EXPECT_TRUE(!e.seen && e.split == Split::ValidUnseen);
  }
  const auto env = build_benchmark(Setup::EnvironmentIL, small_counts(4), 5);
  for (const auto& g : env.groups) {
    for (const auto& e : g.train) EXPECT_EQ(sim::name(e.env_type), g.key);
  }
}

TEST(BenchmarkTest, ValidSeenUsesFreshPlacements) {
  std::set<std::uint64_t> train_placements;
  for (const auto& g : behavior_bench().groups) {
    for (const auto& e : g.train) train_placements.insert(e.placement_seed);
  }
  for (const auto& g : behavior_bench().groups) {
    for (const auto& e : g.valid_seen) EXPECT_FALSE(train_placements.count(e.placement_seed));
  }
}

TEST(BenchmarkTest, EveryEpisodeReplays) {
  for (const auto& g : behavior_bench().groups) {
    for (const auto* eps : {&g.train, &g.valid_seen, &g.valid_unseen}) {
      for (const auto& e : *eps) {
        const auto r = expert::replay(e);
        EXPECT_TRUE(r.goals.success());
        EXPECT_EQ(r.failed_interactions, 0);
      }
    }
  }
}

TEST(BenchmarkTest, DeterministicAcrossThreadCounts) {
  const auto a = build_benchmark(Setup::BehaviorIL, small_counts(5), 9, 1);
  const auto b = build_benchmark(Setup::BehaviorIL, small_counts(5), 9, 3);
  std::stringstream sa, sb;
  write_episodes(sa, a);
  write_episodes(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  const auto c = build_benchmark(Setup::BehaviorIL, small_counts(5), 10, 1);
  EXPECT_NE(a.groups[0].train[0].id, c.groups[0].train[0].id);
}

TEST(BenchmarkTest, InvalidCountsThrow) {
  EXPECT_THROW(build_benchmark(Setup::BehaviorIL, small_counts(0), 1), BenchmarkError);
  Counts c = small_counts(2);
  c.train_by_task["Garage"] = 3;
  EXPECT_THROW(build_benchmark(Setup::EnvironmentIL, c, 1), BenchmarkError);
}

TEST(BalanceTest, ReferenceCounts) {
  const auto g = balance_groups(groups_of_sizes({11056, 3456, 3370, 3141}), 1);
  std::size_t total = 0;
  for (const auto& x : g) {
    EXPECT_EQ(x.size(), 3141u);
    total += x.size();
  }
  EXPECT_EQ(total, 12564u);
}

TEST(BalanceTest, DeskScaleCounts) {
  const auto g = balance_groups(groups_of_sizes({300, 180, 150, 150}), 2);
  for (const auto& x : g) EXPECT_EQ(x.size(), 150u);
}

TEST(BalanceTest, IdempotentAndOrderPreserving) {
  const auto in = groups_of_sizes({40, 25, 30});
  const auto once = balance_groups(in, 3);
  EXPECT_EQ(balance_groups(once, 99), once);
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_TRUE(std::is_sorted(once[i].begin(), once[i].end()));
    EXPECT_TRUE(std::includes(in[i].begin(), in[i].end(), once[i].begin(), once[i].end()));
  }
  EXPECT_EQ(once[1], in[1]);
}

TEST(BalanceTest, SubsamplingIsUniform) {
  // Each of 10 items survives a 10 -> 3 subsample with probability 0.3.
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto g = balance_groups(groups_of_sizes({10, 3}), static_cast<std::uint64_t>(t));
    for (int v : g[0]) ++hits[v];
  }
  const double se = std::sqrt(0.3 * 0.7 / trials);
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / trials, 0.3, 4 * se);
}

TEST(BalanceTest, EnvironmentDefaults) {
  Counts c = Counts::defaults(Setup::EnvironmentIL);
  c.valid_seen_per_task = 1;
  c.valid_unseen_per_task = 1;
  const auto b = build_benchmark(Setup::EnvironmentIL, c, 4);
  for (const auto& g : b.groups) EXPECT_EQ(g.train.size(), 150u);
  c.balance = false;
  c.train_by_task = {{"Kitchen", 8}, {"Livingroom", 5}, {"Bedroom", 4}, {"Bathroom", 4}};
  const auto imbalanced = build_benchmark(Setup::EnvironmentIL, c, 4);
  EXPECT_EQ(imbalanced.group("Kitchen").train.size(), 8u);
  EXPECT_EQ(imbalanced.group("Bathroom").train.size(), 4u);
}

TEST(OrderingTest, Presets) {
  EXPECT_EQ(preset_ordering(Setup::BehaviorIL, 1).keys,
            (std::vector<TaskKey>{"Examine", "Heat", "Pick2&Place", "Cool", "Pick&Place", "Clean",
                                  "Movable"}));
  EXPECT_EQ(preset_ordering(Setup::EnvironmentIL, 1).keys,
            (std::vector<TaskKey>{"Bedroom", "Bathroom", "Livingroom", "Kitchen"}));
  for (int i = 1; i <= 5; ++i) {
    EXPECT_NO_THROW(preset_ordering(Setup::BehaviorIL, i));
    EXPECT_NO_THROW(preset_ordering(Setup::EnvironmentIL, i));
  }
  EXPECT_THROW(preset_ordering(Setup::BehaviorIL, 6), BenchmarkError);
}

TEST(OrderingTest, ExplicitMustBePermutation) {
  EXPECT_THROW(make_task_ordering(Setup::EnvironmentIL, {"Kitchen", "Kitchen", "Bedroom", "Bathroom"}),
               BenchmarkError);
  EXPECT_THROW(make_task_ordering(Setup::EnvironmentIL, {"Kitchen"}), BenchmarkError);
  const auto o = make_task_ordering(Setup::EnvironmentIL,
                                    {"Kitchen", "Bathroom", "Bedroom", "Livingroom"});
  EXPECT_EQ(o.source, Ordering::Source::Explicit);
}

TEST(OrderingTest, SeededIsDeterministicAndUniform) {
  EXPECT_EQ(make_task_ordering(Setup::BehaviorIL, 42).keys,
            make_task_ordering(Setup::BehaviorIL, 42).keys);
  std::map<std::vector<TaskKey>, int> counts;
  const int trials = 24000;
  for (int s = 0; s < trials; ++s) {
    const auto o = make_task_ordering(Setup::EnvironmentIL, static_cast<std::uint64_t>(s));
    EXPECT_EQ(o.source, Ordering::Source::SeededRandom);
    ++counts[o.keys];
  }
  EXPECT_EQ(counts.size(), 24u);
  const double p = 1.0 / 24.0;
  const double se = std::sqrt(p * (1 - p) / trials);
  for (const auto& [perm, n] : counts) EXPECT_NEAR(static_cast<double>(n) / trials, p, 5 * se);
}

TEST(StreamTest, EmitsEveryTrainingEpisodeOnceInTaskOrder) {
  const auto& b = behavior_bench();
  const auto ordering = preset_ordering(Setup::BehaviorIL, 2);
  EpisodeStream s(b, ordering, 17);
  EXPECT_EQ(s.size(), b.train_size());

  std::vector<std::uint64_t> expected;
  for (const auto& key : ordering.keys) {
    const auto& g = b.group(key);
    for (std::size_t i : task_shuffle(g.train.size(), 17, key)) expected.push_back(g.train[i].id);
  }
  EXPECT_EQ(s.episode_ids(), expected);

  std::size_t n = 0;
  std::map<const expert::Demonstration*, int> seen;
  while (auto r = s.next()) {
    EXPECT_EQ(r->index, n);
    ++seen[r->demo.get()];
    ++n;
  }
  EXPECT_EQ(n, b.train_size());
  EXPECT_EQ(seen.size(), n);
  EXPECT_FALSE(s.next());
  EXPECT_EQ(s.remaining(), 0u);
  EXPECT_EQ(s.task_ends().back(), n);
}

TEST(StreamTest, RecordCarriesNoTaskIdentity) {
  // Exactly two members: the stream position and the learner-visible demonstration.
  const auto [index, demo] = StreamRecord{};
  static_assert(std::is_same_v<decltype(index), const std::size_t>);
  static_assert(std::is_same_v<decltype(demo), const std::shared_ptr<const expert::Demonstration>>);
  static_assert(!std::is_copy_constructible_v<EpisodeStream>);
  (void)index;
  (void)demo;
}

TEST(StreamTest, ShuffleDependsOnSeed) {
  EXPECT_EQ(task_shuffle(50, 1, "Heat"), task_shuffle(50, 1, "Heat"));
  EXPECT_NE(task_shuffle(50, 1, "Heat"), task_shuffle(50, 2, "Heat"));
  EXPECT_NE(task_shuffle(50, 1, "Heat"), task_shuffle(50, 1, "Cool"));
}

TEST(ManifestTest, RoundTrip) {
  const auto& b = behavior_bench();
  std::stringstream ss;
  write_manifest(ss, b);
  const auto m = read_manifest(ss);
  EXPECT_EQ(m.setup, b.setup);
  EXPECT_EQ(m.seed, b.seed);
  ASSERT_EQ(m.entries.size(), b.groups.size() * 3);
  for (const auto& e : m.entries) {
    const auto& g = b.group(e.key);
    const auto& eps = e.split == Split::Train       ? g.train
                      : e.split == Split::ValidSeen ? g.valid_seen
                                                    : g.valid_unseen;
    ASSERT_EQ(e.episode_ids.size(), eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) EXPECT_EQ(e.episode_ids[i], eps[i].id);
  }
}

}  // namespace
}  // namespace minialfred::stream
