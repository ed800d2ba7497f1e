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

#include <atomic>
#include <cmath>
#include <istream>
#include <thread>

#include "minialfred/bench.hpp"

namespace minialfred::bench {

std::string_view name(EvalSplit s) { return s == EvalSplit::Seen ? "seen" : "unseen"; }

std::optional<EvalSplit> parse_eval_split(std::string_view s) {
  if (s == "seen") return EvalSplit::Seen;
  if (s == "unseen") return EvalSplit::Unseen;
  return std::nullopt;
}

EvalResult aggregate_outcomes(EvalSplit split, std::vector<EpisodeOutcome> outcomes) {
  if (outcomes.empty()) throw EvalError("cannot evaluate an empty episode list");
  EvalResult r;
  r.split = split;
  std::size_t successes = 0;
  long satisfied = 0;
  long total = 0;
  for (const auto& o : outcomes) {
    if (o.total <= 0 || o.satisfied < 0 || o.satisfied > o.total) {
      throw EvalError("episode outcome with inconsistent goal counts");
    }
    successes += o.success ? 1 : 0;
    satisfied += o.satisfied;
    total += o.total;
  }
  r.sr = static_cast<double>(successes) / static_cast<double>(outcomes.size());
  r.gc = static_cast<double>(satisfied) / static_cast<double>(total);
  r.episodes = std::move(outcomes);
  return r;
}

EvalResult evaluate(const policy::PolicyModel& model,
                    std::span<const expert::Episode* const> episodes, EvalSplit split,
                    unsigned threads) {
  if (episodes.empty()) throw EvalError("cannot evaluate an empty episode list");
  std::vector<EpisodeOutcome> outcomes(episodes.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < episodes.size(); i = next++) {
      const auto& e = *episodes[i];
      const auto r = policy::greedy_rollout(model, e.initial_layout(), e.task);
      outcomes[i] = {r.success, r.goals.satisfied, r.goals.total};
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(episodes.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return aggregate_outcomes(split, std::move(outcomes));
}

std::vector<const expert::Episode*> learned_so_far(const stream::Benchmark& benchmark,
                                                   const stream::Ordering& ordering,
                                                   int task_index, EvalSplit split) {
  if (task_index < 0 || task_index >= static_cast<int>(ordering.keys.size())) {
    throw EvalError("task index " + std::to_string(task_index) + " outside the ordering");
  }
  std::vector<const expert::Episode*> out;
  for (int j = 0; j <= task_index; ++j) {
    const auto& g = benchmark.group(ordering.keys[static_cast<std::size_t>(j)]);
    const auto& eps = split == EvalSplit::Seen ? g.valid_seen : g.valid_unseen;
    for (const auto& e : eps) out.push_back(&e);
  }
  return out;
}

IncrementalMetrics aggregate_incremental(std::span<const double> per_task) {
  if (per_task.empty()) throw EvalError("no task checkpoints to aggregate");
  double s = 0.0;
  for (double v : per_task) s += v;
  return {per_task.back(), s / static_cast<double>(per_task.size())};
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  m.n = values.size();
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"schema", kResultsSchemaVersion},
          {"method", r.method},
          {"setup", r.setup},
          {"ordering", r.ordering_id},
          {"seed", r.seed},
          {"task_index", r.task_index},
          {"split", r.split},
          {"sr", r.sr},
          {"gc", r.gc},
          {"wall_time_s", r.wall_time_s}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  if (j.value("schema", -1) != kResultsSchemaVersion) {
    throw EvalError("unsupported results schema " + j.value("schema", nlohmann::json()).dump());
  }
  RunRecord r;
  r.method = j.at("method").get<std::string>();
  r.setup = j.at("setup").get<std::string>();
  r.ordering_id = j.at("ordering").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.task_index = j.at("task_index").get<int>();
  r.split = j.at("split").get<std::string>();
  r.sr = j.at("sr").get<double>();
  r.gc = j.at("gc").get<double>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

bool same_result(const RunRecord& a, const RunRecord& b) {
  return a.method == b.method && a.setup == b.setup && a.ordering_id == b.ordering_id &&
         a.seed == b.seed && a.task_index == b.task_index && a.split == b.split && a.sr == b.sr &&
         a.gc == b.gc;
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace minialfred::bench
