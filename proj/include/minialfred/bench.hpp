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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "minialfred/clmethods.hpp"
#include "minialfred/policy.hpp"
#include "minialfred/streamgen.hpp"

namespace minialfred::bench {

enum class EvalSplit : std::uint8_t { Seen, Unseen };
std::string_view name(EvalSplit s);
std::optional<EvalSplit> parse_eval_split(std::string_view s);

class EvalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EpisodeOutcome {
  bool success = false;
  int satisfied = 0;
  int total = 0;
};

struct EvalResult {
  EvalSplit split = EvalSplit::Seen;
  std::vector<EpisodeOutcome> episodes;
  double sr = 0.0;  // successes / episodes
  double gc = 0.0;  // sum satisfied / sum total
};

// Throws EvalError on an empty list.
EvalResult aggregate_outcomes(EvalSplit split, std::vector<EpisodeOutcome> outcomes);

// Greedy rollout of every episode from its initial layout. Rollouts are
// spread over `threads` workers; the result does not depend on the count.
EvalResult evaluate(const policy::PolicyModel& model,
                    std::span<const expert::Episode* const> episodes, EvalSplit split,
                    unsigned threads = 1);

// Validation episodes of the first task_index + 1 tasks of the ordering.
std::vector<const expert::Episode*> learned_so_far(const stream::Benchmark& benchmark,
                                                   const stream::Ordering& ordering,
                                                   int task_index, EvalSplit split);

struct IncrementalMetrics {
  double last = 0.0;
  double avg = 0.0;
};
// A_last is the final entry, A_avg the mean. Throws EvalError when empty.
IncrementalMetrics aggregate_incremental(std::span<const double> per_task);

inline constexpr int kResultsSchemaVersion = 1;

struct RunRecord {
  std::string method;
  std::string setup;
  int ordering_id = 0;
  std::uint64_t seed = 0;
  int task_index = 0;
  std::string split;
  double sr = 0.0;
  double gc = 0.0;
  double wall_time_s = 0.0;
};
nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
// Equality of everything except wall time.
bool same_result(const RunRecord& a, const RunRecord& b);
std::vector<RunRecord> read_records(std::istream& in);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OrderingSpec {
  int id = 1;
  // Empty for preset orderings (id in [1, 5]).
  std::vector<stream::TaskKey> keys;
};
stream::Ordering resolve_ordering(stream::Setup setup, const OrderingSpec& spec);

struct ExperimentConfig {
  stream::Setup setup = stream::Setup::BehaviorIL;
  std::vector<cl::Method> methods{cl::Method::CAMA};
  std::vector<std::uint64_t> seeds{0};
  std::vector<OrderingSpec> orderings{OrderingSpec{}};
  std::uint64_t benchmark_seed = 0;
  stream::Counts counts;
  cl::MethodConfig method;
  unsigned workers = 1;
  unsigned eval_threads = 1;
  bool write_checkpoints = true;
};

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct RunOutput {
  std::vector<RunRecord> records;
  std::vector<cl::StepLog> steps;
};

// One (method, ordering, seed) run with evaluation at every checkpoint.
// When `out_dir` is given, checkpoints, step logs and traces are written
// under it.
RunOutput run_single(const ExperimentConfig& config, const stream::Benchmark& benchmark,
                     cl::Method method, const OrderingSpec& ordering, std::uint64_t seed,
                     const std::filesystem::path* out_dir = nullptr);

// Builds the benchmark and runs methods x orderings x seeds on
// config.workers threads. Every record is appended to
// out_dir/records.jsonl as soon as it exists. Returns the records in run
// order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& out_dir);

std::string run_name(cl::Method method, int ordering_id, std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
};
MeanStd mean_std(std::span<const double> values);

struct SummaryCell {
  std::string method;
  std::string setup;
  std::string split;
  std::string metric;  // SR_last, GC_last, SR_avg, GC_avg
  std::optional<MeanStd> value;  // nullopt: not defined (Joint A_avg)
};

struct Summary {
  std::vector<SummaryCell> cells;
  // Runs that lack checkpoints, one message each.
  std::vector<std::string> missing;
};

Summary summarize(std::span<const RunRecord> records);
const SummaryCell* find_cell(const Summary& summary, std::string_view method,
                             std::string_view split, std::string_view metric);
std::string format_table(const Summary& summary);
nlohmann::json summary_json(const Summary& summary);

// Per-step, per-class diagnostic trace: gamma and memory-frame accuracy
// counts.
struct TraceRow {
  std::size_t step = 0;
  char head = 'a';  // 'a' action, 'c' class
  int cls = 0;
  double gamma = 0.0;
  int correct = 0;
  int total = 0;
};
std::vector<TraceRow> trace_rows(std::span<const cl::StepLog> steps);
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either side is constant. Throws EvalError on a length mismatch.
double spearman(std::span<const double> x, std::span<const double> y);

struct ClassCorrelation {
  int cls = 0;
  double rho = 0.0;
  std::size_t points = 0;
};
struct Diagnostic {
  std::vector<ClassCorrelation> per_class;
  double mean_rho = 0.0;
};

// For each class of `head`, correlates gamma with the accuracy over the
// last `window` steps. Classes with fewer than `min_points` defined points
// are left out.
Diagnostic confidence_accuracy(std::span<const TraceRow> rows, char head, std::size_t window = 50,
                               std::size_t min_points = 20);

// Running-accuracy series next to gamma, one CSV line per (step, class).
void write_diagnostic_csv(std::ostream& out, std::string_view run, std::span<const TraceRow> rows,
                          char head, std::size_t window = 50);

}  // namespace minialfred::bench
