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
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "minialfred/streamgen.hpp"

namespace minialfred::stream {
namespace {

using nlohmann::json;

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t key_hash(const TaskKey& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::array<std::array<std::string_view, 7>, 5> kBehaviorPresets = {{
    {"Examine", "Heat", "Pick2&Place", "Cool", "Pick&Place", "Clean", "Movable"},
    {"Pick&Place", "Pick2&Place", "Clean", "Heat", "Examine", "Movable", "Cool"},
    {"Pick&Place", "Examine", "Movable", "Clean", "Pick2&Place", "Cool", "Heat"},
    {"Movable", "Pick2&Place", "Examine", "Pick&Place", "Heat", "Cool", "Clean"},
    {"Clean", "Pick&Place", "Movable", "Heat", "Cool", "Pick2&Place", "Examine"},
}};

const std::array<std::array<std::string_view, 4>, 5> kEnvironmentPresets = {{
    {"Bedroom", "Bathroom", "Livingroom", "Kitchen"},
    {"Bathroom", "Bedroom", "Kitchen", "Livingroom"},
    {"Bedroom", "Livingroom", "Bathroom", "Kitchen"},
    {"Bedroom", "Bathroom", "Kitchen", "Livingroom"},
    {"Bathroom", "Kitchen", "Bedroom", "Livingroom"},
}};

}  // namespace

Ordering make_task_ordering(Setup setup, std::vector<TaskKey> keys) {
  auto expected = task_keys(setup);
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  std::sort(expected.begin(), expected.end());
  if (sorted != expected) {
    throw BenchmarkError("ordering is not a permutation of the " + std::string(name(setup)) +
                         " tasks");
  }
  return {std::move(keys), Ordering::Source::Explicit};
}

Ordering make_task_ordering(Setup setup, std::uint64_t seed) {
  auto keys = task_keys(setup);
  Rng rng(mix_seed({seed, 0x0bde7}));
  rng.shuffle(keys);
  return {std::move(keys), Ordering::Source::SeededRandom};
}

Ordering preset_ordering(Setup setup, int index) {
  if (index < 1 || index > 5) throw BenchmarkError("preset ordering index must be in [1, 5]");
  std::vector<TaskKey> keys;
  if (setup == Setup::BehaviorIL) {
    for (auto k : kBehaviorPresets[index - 1]) keys.emplace_back(k);
  } else {
    for (auto k : kEnvironmentPresets[index - 1]) keys.emplace_back(k);
  }
  return make_task_ordering(setup, std::move(keys));
}

std::vector<std::size_t> task_shuffle(std::size_t n, std::uint64_t shuffle_seed,
                                      const TaskKey& key) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(mix_seed({shuffle_seed, key_hash(key)}));
  rng.shuffle(idx);
  return idx;
}

EpisodeStream::EpisodeStream(const Benchmark& benchmark, const Ordering& ordering,
                             std::uint64_t shuffle_seed) {
  make_task_ordering(benchmark.setup, ordering.keys);
  for (const auto& key : ordering.keys) {
    const auto& group = benchmark.group(key);
    for (std::size_t i : task_shuffle(group.train.size(), shuffle_seed, key)) {
      order_.push_back(&group.train[i]);
    }
    task_ends_.push_back(order_.size());
  }
}

std::optional<StreamRecord> EpisodeStream::next() {
  if (pos_ >= order_.size()) return std::nullopt;
  StreamRecord r{pos_, order_[pos_]->demo};
  ++pos_;
  return r;
}

std::vector<std::uint64_t> EpisodeStream::episode_ids() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(order_.size());
  for (const auto* e : order_) ids.push_back(e->id);
  return ids;
}

void write_manifest(std::ostream& out, const Benchmark& b) {
  json counts = {
      {"train_per_task", b.counts.train_per_task},
      {"train_by_task", b.counts.train_by_task},
      {"valid_seen_per_task", b.counts.valid_seen_per_task},
      {"valid_unseen_per_task", b.counts.valid_unseen_per_task},
      {"balance", b.counts.balance},
  };
  json header = {{"record", "benchmark"},
                 {"version", kManifestSchemaVersion},
                 {"setup", name(b.setup)},
                 {"seed", b.seed},
                 {"counts", counts},
                 {"group_count", b.groups.size()}};
  out << header.dump() << '\n';
  for (const auto& g : b.groups) {
    for (const auto& [split, eps] : {std::pair{expert::Split::Train, &g.train},
                                     std::pair{expert::Split::ValidSeen, &g.valid_seen},
                                     std::pair{expert::Split::ValidUnseen, &g.valid_unseen}}) {
      json ids = json::array();
      for (const auto& e : *eps) ids.push_back(e.id);
      json rec = {{"record", "group"},
                  {"task_key", g.key},
                  {"split", expert::name(split)},
                  {"episode_ids", ids}};
      out << rec.dump() << '\n';
    }
  }
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto kind = j.value("record", "");
    if (kind == "benchmark") {
      if (j.at("version").get<int>() != kManifestSchemaVersion) {
        throw std::runtime_error("unsupported manifest schema version");
      }
      const auto setup = parse_setup(j.at("setup").get<std::string>());
      if (!setup) throw std::runtime_error("unknown setup in manifest");
      m.setup = *setup;
      m.seed = j.at("seed").get<std::uint64_t>();
      have_header = true;
    } else if (kind == "group") {
      if (!have_header) throw std::runtime_error("manifest group before header");
      ManifestEntry e;
      e.key = j.at("task_key").get<std::string>();
      const auto split = expert::parse_split(j.at("split").get<std::string>());
      if (!split) throw std::runtime_error("unknown split in manifest");
      e.split = *split;
      e.episode_ids = j.at("episode_ids").get<std::vector<std::uint64_t>>();
      m.entries.push_back(std::move(e));
    } else {
      throw std::runtime_error("unexpected manifest record: " + kind);
    }
  }
  if (!have_header) throw std::runtime_error("manifest has no header");
  return m;
}

void write_episodes(std::ostream& out, const Benchmark& b) {
  for (const auto& g : b.groups) {
    for (const auto* eps : {&g.train, &g.valid_seen, &g.valid_unseen}) {
      for (const auto& e : *eps) expert::write_episode(out, e);
    }
  }
}

}  // namespace minialfred::stream
