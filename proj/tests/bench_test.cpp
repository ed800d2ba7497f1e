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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "minialfred/bench.hpp"

namespace minialfred::bench {
namespace {

namespace fs = std::filesystem;

stream::Counts tiny_counts() {
  stream::Counts c;
  c.train_per_task = 3;
  c.valid_seen_per_task = 2;
  c.valid_unseen_per_task = 2;
  return c;
}

const stream::Benchmark& tiny_benchmark() {
  static const auto b = stream::build_benchmark(stream::Setup::BehaviorIL, tiny_counts(), 9);
  return b;
}

policy::PolicyModel tiny_model() { return policy::PolicyModel::create({16, 8, 2}); }

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("minialfred_bench_" + name);
  fs::remove_all(dir);
  return dir;
}

RunRecord record(std::string method, int task, std::string split, double sr, double gc,
                 std::uint64_t seed = 0, int ordering = 1) {
  RunRecord r;
  r.method = std::move(method);
  r.setup = "behavior-il";
  r.ordering_id = ordering;
  r.seed = seed;
  r.task_index = task;
  r.split = std::move(split);
  r.sr = sr;
  r.gc = gc;
  return r;
}

// ------------------------------------------------------------- evaluation

TEST(AggregateOutcomesTest, AllSucceed) {
  const auto r = aggregate_outcomes(EvalSplit::Seen, {{true, 2, 2}, {true, 1, 1}, {true, 4, 4}});
  EXPECT_EQ(r.sr, 1.0);
  EXPECT_EQ(r.gc, 1.0);
}

TEST(AggregateOutcomesTest, PooledGoalConditions) {
  const auto r = aggregate_outcomes(EvalSplit::Unseen, {{true, 3, 3}, {false, 1, 2}});
  EXPECT_DOUBLE_EQ(r.sr, 0.5);
  EXPECT_DOUBLE_EQ(r.gc, 0.8);
  EXPECT_EQ(r.split, EvalSplit::Unseen);
  EXPECT_EQ(r.episodes.size(), 2u);
}

TEST(AggregateOutcomesTest, EmptyListIsAnError) {
  EXPECT_THROW(aggregate_outcomes(EvalSplit::Seen, {}), EvalError);
  const std::vector<const expert::Episode*> none;
  EXPECT_THROW(evaluate(tiny_model(), none, EvalSplit::Seen), EvalError);
}

TEST(AggregateOutcomesTest, InconsistentCountsRejected) {
  EXPECT_THROW(aggregate_outcomes(EvalSplit::Seen, {{false, 3, 2}}), EvalError);
  EXPECT_THROW(aggregate_outcomes(EvalSplit::Seen, {{false, 0, 0}}), EvalError);
}

TEST(AggregateOutcomesProperty, GcBoundsGoalWeightedSuccess) {
  // Successful episodes contribute all their conditions, so pooled GC is at
  // least the goal-weighted success rate, and at least SR whenever every
  // episode has the same number of conditions.
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<EpisodeOutcome> v;
    const auto n = 1 + rng.uniform_index(20);
    const bool equal_goals = trial % 2 == 0;
    const int fixed_total = 1 + static_cast<int>(rng.uniform_index(4));
    int weighted = 0, goals = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int total = equal_goals ? fixed_total : 1 + static_cast<int>(rng.uniform_index(4));
      const bool success = rng.uniform01() < 0.3;
      const int sat = success ? total : static_cast<int>(rng.uniform_index(static_cast<std::size_t>(total)));
      v.push_back({success, sat, total});
      weighted += success ? total : 0;
      goals += total;
    }
    const auto r = aggregate_outcomes(EvalSplit::Seen, v);
    EXPECT_GE(r.gc, static_cast<double>(weighted) / goals);
    if (equal_goals) {
      EXPECT_GE(r.gc, r.sr);
    }
  }
}

TEST(AggregateOutcomesTest, PooledGcCanTrailSrWithMixedGoalCounts) {
  const auto r = aggregate_outcomes(EvalSplit::Seen, {{true, 1, 1}, {false, 0, 3}});
  EXPECT_DOUBLE_EQ(r.sr, 0.5);
  EXPECT_DOUBLE_EQ(r.gc, 0.25);
}

TEST(EvaluateTest, MatchesPerEpisodeRollouts) {
  const auto m = tiny_model();
  const auto eps = learned_so_far(tiny_benchmark(), stream::preset_ordering(stream::Setup::BehaviorIL, 1),
                                  6, EvalSplit::Unseen);
  const auto r = evaluate(m, eps, EvalSplit::Unseen);
  ASSERT_EQ(r.episodes.size(), eps.size());
  std::size_t successes = 0;
  int sat = 0, total = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto roll = policy::greedy_rollout(m, eps[i]->initial_layout(), eps[i]->task);
    EXPECT_EQ(r.episodes[i].success, roll.success);
    EXPECT_EQ(r.episodes[i].satisfied, roll.goals.satisfied);
    successes += roll.success;
    sat += roll.goals.satisfied;
    total += roll.goals.total;
  }
  EXPECT_EQ(r.sr, static_cast<double>(successes) / static_cast<double>(eps.size()));
  EXPECT_EQ(r.gc, static_cast<double>(sat) / total);
}

TEST(EvaluateTest, DeterministicAcrossThreadCounts) {
  const auto m = tiny_model();
  const auto eps = learned_so_far(tiny_benchmark(), stream::preset_ordering(stream::Setup::BehaviorIL, 2),
                                  6, EvalSplit::Seen);
  const auto a = evaluate(m, eps, EvalSplit::Seen, 1);
  const auto b = evaluate(m, eps, EvalSplit::Seen, 1);
  const auto c = evaluate(m, eps, EvalSplit::Seen, 3);
  EXPECT_EQ(a.sr, b.sr);
  EXPECT_EQ(a.gc, b.gc);
  EXPECT_EQ(a.sr, c.sr);
  EXPECT_EQ(a.gc, c.gc);
}

TEST(LearnedSoFarTest, CoverageGrowsMonotonically) {
  const auto& b = tiny_benchmark();
  const auto ordering = stream::preset_ordering(stream::Setup::BehaviorIL, 4);
  for (auto split : {EvalSplit::Seen, EvalSplit::Unseen}) {
    std::vector<const expert::Episode*> prev;
    for (int j = 0; j < 7; ++j) {
      const auto cur = learned_so_far(b, ordering, j, split);
      EXPECT_EQ(cur.size(), static_cast<std::size_t>(2 * (j + 1)));
      ASSERT_GE(cur.size(), prev.size());
      for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_EQ(cur[i], prev[i]);
      for (const auto* e : cur) {
        EXPECT_EQ(e->split, split == EvalSplit::Seen ? expert::Split::ValidSeen
                                                     : expert::Split::ValidUnseen);
      }
      prev = cur;
    }
    const auto first = learned_so_far(b, ordering, 0, split);
    for (const auto* e : first) EXPECT_EQ(std::string(sim::name(e->behavior())), ordering.keys[0]);
  }
  EXPECT_THROW(learned_so_far(b, ordering, 7, EvalSplit::Seen), EvalError);
}

// ------------------------------------------------------ incremental metrics

TEST(AggregateIncrementalTest, SingleTask) {
  const std::vector<double> v{0.4};
  const auto m = aggregate_incremental(v);
  EXPECT_EQ(m.last, 0.4);
  EXPECT_EQ(m.avg, 0.4);
}

TEST(AggregateIncrementalTest, LastAndAverage) {
  const std::vector<double> v{0.5, 0.3, 0.1};
  const auto m = aggregate_incremental(v);
  EXPECT_EQ(m.last, 0.1);
  EXPECT_NEAR(m.avg, 0.3, 1e-15);
}

TEST(AggregateIncrementalTest, OrderSensitivity) {
  const std::vector<double> a{0.5, 0.3, 0.1};
  const std::vector<double> b{0.1, 0.5, 0.3};
  EXPECT_NE(aggregate_incremental(a).last, aggregate_incremental(b).last);
  EXPECT_NEAR(aggregate_incremental(a).avg, aggregate_incremental(b).avg, 1e-15);
}

TEST(AggregateIncrementalTest, EmptyIsAnError) {
  EXPECT_THROW(aggregate_incremental({}), EvalError);
}

TEST(MeanStdTest, SampleStandardDeviation) {
  const std::vector<double> v{10, 20, 30};
  const auto m = mean_std(v);
  EXPECT_DOUBLE_EQ(m.mean, 20.0);
  EXPECT_DOUBLE_EQ(m.std, 10.0);
  EXPECT_EQ(m.n, 3u);
  const std::vector<double> one{7};
  EXPECT_EQ(mean_std(one).std, 0.0);
}

// ---------------------------------------------------------------- records

TEST(RunRecordTest, JsonRoundTrip) {
  auto r = record("CAMA", 3, "unseen", 0.125, 0.5, 42, 2);
  r.wall_time_s = 1.5;
  const auto back = record_from_json(to_json(r));
  EXPECT_TRUE(same_result(r, back));
  EXPECT_EQ(back.wall_time_s, 1.5);
  auto j = to_json(r);
  j["schema"] = 99;
  EXPECT_THROW(record_from_json(j), EvalError);
}

TEST(RunRecordTest, WallTimeIgnoredByComparison) {
  auto a = record("ER", 0, "seen", 0.1, 0.2);
  auto b = a;
  b.wall_time_s = 99.0;
  EXPECT_TRUE(same_result(a, b));
  b.sr = 0.2;
  EXPECT_FALSE(same_result(a, b));
}

// ----------------------------------------------------------------- config

std::string config_error(const nlohmann::json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseConfigTest, UnknownKeyNamed) {
  const auto msg = config_error({{"methods", {"ER"}}, {"memroy_size", 10}});
  EXPECT_NE(msg.find("memroy_size"), std::string::npos) << msg;
}

TEST(ParseConfigTest, UnknownMethodNamed) {
  const auto msg = config_error({{"methods", {"ER", "MIR"}}});
  EXPECT_NE(msg.find("methods"), std::string::npos) << msg;
  EXPECT_NE(msg.find("MIR"), std::string::npos) << msg;
}

TEST(ParseConfigTest, WrongTypeAndRangeNamed) {
  EXPECT_NE(config_error({{"seeds", "zero"}}).find("seeds"), std::string::npos);
  EXPECT_NE(config_error({{"alpha_a", 1.5}}).find("alpha_a"), std::string::npos);
  EXPECT_NE(config_error({{"orderings", {9}}}).find("orderings"), std::string::npos);
  EXPECT_NE(config_error({{"setup", "kitchen-il"}}).find("setup"), std::string::npos);
  EXPECT_NE(config_error({{"train_by_task", {{"Nap", 3}}}}).find("Nap"), std::string::npos);
}

TEST(ParseConfigTest, ReadsValues) {
  const auto c = parse_config({{"setup", "environment-il"},
                               {"methods", {"DER++", "CAMA"}},
                               {"seeds", {3, 4}},
                               {"orderings", {2, {{"id", 9}, {"keys", {"Bathroom", "Bedroom", "Kitchen", "Livingroom"}}}}},
                               {"memory_size", 50},
                               {"alpha", 0.25},
                               {"queue_n", 20},
                               {"balance", false},
                               {"train_by_task", {{"Kitchen", 7}}},
                               {"train_per_task", 5}});
  EXPECT_EQ(c.setup, stream::Setup::EnvironmentIL);
  EXPECT_EQ(c.methods, (std::vector<cl::Method>{cl::Method::DERpp, cl::Method::CAMA}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  ASSERT_EQ(c.orderings.size(), 2u);
  EXPECT_EQ(c.orderings[1].id, 9);
  EXPECT_EQ(c.method.memory_size, 50);
  EXPECT_EQ(c.method.alpha, 0.25);
  EXPECT_EQ(c.method.queue_n, 20);
  EXPECT_FALSE(c.counts.balance);
  EXPECT_EQ(c.counts.train_for("Kitchen"), 7);
  EXPECT_EQ(c.counts.train_for("Bedroom"), 5);
}

TEST(ParseConfigTest, EnvironmentDefaultsAreImbalanced) {
  const auto c = parse_config({{"setup", "environment-il"}});
  EXPECT_EQ(c.counts.train_for("Kitchen"), 300);
  EXPECT_EQ(c.counts.train_for("Livingroom"), 180);
}

TEST(ParseConfigTest, JsonRoundTrip) {
  const auto c = parse_config({{"methods", {"EWCpp", "Joint"}}, {"seeds", {1}}, {"orientation", "old"}});
  const auto back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(c), config_to_json(back));
  EXPECT_EQ(back.method.orientation, cl::GammaOrientation::OldWeighted);
}

// -------------------------------------------------------------- experiment

ExperimentConfig tiny_experiment(std::vector<cl::Method> methods) {
  ExperimentConfig c;
  c.methods = std::move(methods);
  c.seeds = {0};
  c.orderings = {OrderingSpec{1, {}}};
  c.benchmark_seed = 9;
  c.counts = tiny_counts();
  c.method.policy = {16, 8, 0};
  c.method.memory_size = 5;
  c.method.joint_epochs = 1;
  return c;
}

TEST(RunExperimentTest, RecordCountAndFiles) {
  const auto dir = scratch_dir("count");
  const auto records = run_experiment(tiny_experiment({cl::Method::Finetune}), dir);
  EXPECT_EQ(records.size(), 14u);
  for (int j = 0; j < 7; ++j) {
    EXPECT_TRUE(fs::exists(dir / "checkpoints" / ("Finetune_o1_s0_task" + std::to_string(j) + ".bin")));
  }
  EXPECT_TRUE(fs::exists(dir / "steps" / "Finetune_o1_s0.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "traces" / "Finetune_o1_s0.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
  std::ifstream in(dir / "records.jsonl");
  const auto from_file = read_records(in);
  ASSERT_EQ(from_file.size(), 14u);
  for (std::size_t i = 0; i < 14; ++i) EXPECT_TRUE(same_result(records[i], from_file[i]));

  std::ifstream ck(dir / "checkpoints" / "Finetune_o1_s0_task6.bin", std::ios::binary);
  const auto params = nn::load_checkpoint(ck);
  EXPECT_EQ(params.size(), policy::PolicyModel::create({16, 8, 0}).params.size());
}

TEST(RunExperimentTest, RerunAppendsIdenticalMetrics) {
  const auto dir = scratch_dir("rerun");
  const auto cfg = tiny_experiment({cl::Method::CAMA, cl::Method::Joint});
  run_experiment(cfg, dir);
  run_experiment(cfg, dir);
  std::ifstream in(dir / "records.jsonl");
  const auto all = read_records(in);
  ASSERT_EQ(all.size(), 2u * (14 + 2));
  for (std::size_t i = 0; i < all.size() / 2; ++i) {
    EXPECT_TRUE(same_result(all[i], all[i + all.size() / 2])) << i;
  }
}

TEST(RunExperimentTest, WorkerCountDoesNotChangeResults) {
  auto cfg = tiny_experiment({cl::Method::ER, cl::Method::DERpp});
  const auto a = run_experiment(cfg, scratch_dir("w1"));
  cfg.workers = 2;
  const auto b = run_experiment(cfg, scratch_dir("w2"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_result(a[i], b[i]));
}

// ---------------------------------------------------------------- summary

TEST(SummarizeTest, MeanAndSampleStdAcrossSeeds) {
  std::vector<RunRecord> rs;
  const double finals[] = {0.1, 0.2, 0.3};
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (int j = 0; j < 7; ++j) {
      const double v = j == 6 ? finals[s] : 0.5;
      rs.push_back(record("ER", j, "unseen", v, v, s));
    }
  }
  const auto sum = summarize(rs);
  EXPECT_TRUE(sum.missing.empty());
  const auto* last = find_cell(sum, "ER", "unseen", "SR_last");
  ASSERT_NE(last, nullptr);
  ASSERT_TRUE(last->value);
  EXPECT_NEAR(last->value->mean, 0.2, 1e-15);
  EXPECT_NEAR(last->value->std, 0.1, 1e-15);
  const auto* avg = find_cell(sum, "ER", "unseen", "SR_avg");
  ASSERT_TRUE(avg && avg->value);
  EXPECT_NEAR(avg->value->mean, (6 * 0.5 + 0.2) / 7, 1e-15);
}

TEST(SummarizeTest, SingleRunHasZeroStd) {
  std::vector<RunRecord> rs;
  for (int j = 0; j < 7; ++j) rs.push_back(record("CAMA", j, "seen", 0.25, 0.5));
  const auto* c = find_cell(summarize(rs), "CAMA", "seen", "GC_last");
  ASSERT_TRUE(c && c->value);
  EXPECT_EQ(c->value->std, 0.0);
  EXPECT_EQ(c->value->n, 1u);
}

TEST(SummarizeTest, JointAverageRendersAsDash) {
  std::vector<RunRecord> rs{record("Joint", 6, "unseen", 0.3, 0.4)};
  const auto sum = summarize(rs);
  const auto* avg = find_cell(sum, "Joint", "unseen", "SR_avg");
  ASSERT_NE(avg, nullptr);
  EXPECT_FALSE(avg->value);
  const auto table = format_table(sum);
  EXPECT_NE(table.find("−"), std::string::npos) << table;
  EXPECT_NE(table.find("30.00 ± 0.00"), std::string::npos) << table;
  EXPECT_TRUE(summary_json(sum)["cells"][2]["mean"].is_null());
}

TEST(SummarizeTest, MissingCheckpointsReportedNotFabricated) {
  std::vector<RunRecord> rs;
  for (int j = 0; j < 4; ++j) rs.push_back(record("DERpp", j, "seen", 0.1, 0.2));
  const auto sum = summarize(rs);
  ASSERT_EQ(sum.missing.size(), 1u);
  EXPECT_NE(sum.missing[0].find("4 of 7"), std::string::npos) << sum.missing[0];
  EXPECT_EQ(find_cell(sum, "DERpp", "seen", "SR_last"), nullptr);
  EXPECT_NE(format_table(sum).find("missing"), std::string::npos);
}

TEST(SummarizeTest, DuplicateRecordsCountOnce) {
  std::vector<RunRecord> rs;
  for (int rep = 0; rep < 2; ++rep) {
    for (int j = 0; j < 7; ++j) rs.push_back(record("ER", j, "seen", 0.1 * j, 0.2));
  }
  const auto* c = find_cell(summarize(rs), "ER", "seen", "SR_last");
  ASSERT_TRUE(c && c->value);
  EXPECT_EQ(c->value->n, 1u);
}

// ------------------------------------------------------------ diagnostics

TEST(SpearmanTest, KnownValues) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 8, 16, 32};
  const std::vector<double> down{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, up), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-15);
  // Average ranks for ties: x ranks {1, 2.5, 2.5, 4}.
  const std::vector<double> tx{1, 2, 2, 3};
  const std::vector<double> ty{1, 2, 3, 4};
  EXPECT_NEAR(spearman(tx, ty), 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
  const std::vector<double> flat{3, 3, 3, 3};
  EXPECT_EQ(spearman(flat, ty), 0.0);
  EXPECT_THROW(spearman(x, ty), EvalError);
}

TEST(TraceTest, CsvRoundTrip) {
  cl::StepLog s;
  s.stream_index = 5;
  s.gamma_action.assign(9, 0.1);
  s.gamma_action[3] = 1.0 / 3.0;
  s.gamma_class.assign(15, 0.0);
  s.memory_action_correct.assign(9, 1);
  s.memory_action_total.assign(9, 2);
  s.memory_class_correct.assign(15, 0);
  s.memory_class_total.assign(15, 1);
  const std::vector<cl::StepLog> steps{s};
  const auto rows = trace_rows(steps);
  ASSERT_EQ(rows.size(), 24u);
  std::stringstream ss;
  write_trace_csv(ss, rows);
  const auto back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].step, rows[i].step);
    EXPECT_EQ(back[i].head, rows[i].head);
    EXPECT_EQ(back[i].cls, rows[i].cls);
    EXPECT_EQ(back[i].gamma, rows[i].gamma);
    EXPECT_EQ(back[i].correct, rows[i].correct);
    EXPECT_EQ(back[i].total, rows[i].total);
  }
  std::stringstream bad("nope\n");
  EXPECT_THROW(read_trace_csv(bad), EvalError);
}

TEST(ConfidenceAccuracyTest, TracksCoMovingSeries) {
  // Class 0: gamma and accuracy both rise. Class 1: gamma rises while
  // accuracy falls. Class 2 never appears in memory frames.
  std::vector<TraceRow> rows;
  for (std::size_t t = 0; t < 100; ++t) {
    const double g = 0.005 * static_cast<double>(t);
    rows.push_back({t, 'a', 0, g, t >= 50 ? 1 : 0, 1});
    rows.push_back({t, 'a', 1, g, t < 50 ? 1 : 0, 1});
    rows.push_back({t, 'a', 2, g, 0, 0});
  }
  const auto d = confidence_accuracy(rows, 'a', 10, 20);
  ASSERT_EQ(d.per_class.size(), 2u);
  EXPECT_GT(d.per_class[0].rho, 0.8);
  EXPECT_LT(d.per_class[1].rho, -0.8);
  EXPECT_EQ(d.per_class[0].points, 100u);
  EXPECT_NEAR(d.mean_rho, 0.5 * (d.per_class[0].rho + d.per_class[1].rho), 1e-15);
  std::ostringstream os;
  write_diagnostic_csv(os, "run", rows, 'a', 10);
  EXPECT_NE(os.str().find("run,99,a,0,"), std::string::npos);
}

}  // namespace
}  // namespace minialfred::bench
