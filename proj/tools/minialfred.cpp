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

// Command-line front end: gen, train, sweep, report.
// Every flag can also be set through MINIALFRED_<FLAG> (upper case,
// dashes as underscores), e.g. MINIALFRED_MEMORY_SIZE=200.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "minialfred/bench.hpp"
#include "minialfred/clmethods.hpp"
#include "minialfred/streamgen.hpp"

namespace fs = std::filesystem;
using namespace minialfred;

namespace {

struct Options {
  std::string config;
  std::string setup;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::string ordering;
  std::optional<std::uint64_t> benchmark_seed;
  std::optional<int> train_per_task;
  std::optional<int> valid_per_task;
  std::optional<int> memory_size;
  std::optional<double> alpha;
  std::optional<double> alpha_a;
  std::optional<double> alpha_c;
  std::optional<int> queue_n;
  std::optional<unsigned> workers;
  std::optional<unsigned> eval_threads;
  bool no_balance = false;
  bool no_checkpoints = false;
  std::string out = "out";
};

stream::Setup setup_from_flag(const std::string& s) {
  if (s == "behavior" || s == "behavior-il") return stream::Setup::BehaviorIL;
  if (s == "environment" || s == "environment-il") return stream::Setup::EnvironmentIL;
  throw bench::ConfigError("unknown setup '" + s + "'");
}

bench::OrderingSpec ordering_from_flag(const std::string& s) {
  bench::OrderingSpec spec;
  if (s.find(',') == std::string::npos && !s.empty() &&
      s.find_first_not_of("0123456789") == std::string::npos) {
    spec.id = std::stoi(s);
    return spec;
  }
  spec.id = 0;
  std::stringstream ss(s);
  std::string key;
  while (std::getline(ss, key, ',')) {
    if (!key.empty()) spec.keys.push_back(key);
  }
  return spec;
}

void add_env(CLI::Option* opt, const std::string& flag) {
  std::string env = "MINIALFRED_";
  for (char ch : flag) env += ch == '-' ? '_' : static_cast<char>(std::toupper(ch));
  opt->envname(env);
}

template <typename T>
void add(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
  add_env(app->add_option("--" + flag, target, help), flag);
}

void add_benchmark_flags(CLI::App* app, Options& o) {
  add(app, "config", o.config, "JSON experiment config used as the base");
  add(app, "setup", o.setup, "behavior or environment");
  add(app, "benchmark-seed", o.benchmark_seed, "seed of the generated benchmark");
  add(app, "train-per-task", o.train_per_task, "training episodes per task");
  add(app, "valid-per-task", o.valid_per_task, "seen and unseen validation episodes per task");
  add_env(app->add_flag("--no-balance", o.no_balance, "keep environment groups at natural size"),
          "no-balance");
  add(app, "out", o.out, "output directory");
}

void add_training_flags(CLI::App* app, Options& o) {
  add(app, "method", o.methods, "method name(s)");
  add(app, "seed", o.seeds, "run seed(s)");
  add(app, "ordering", o.ordering, "preset index (1-5) or comma-separated task keys");
  add(app, "memory-size", o.memory_size, "episodic memory capacity");
  add(app, "alpha", o.alpha, "distillation weight");
  add(app, "alpha-a", o.alpha_a, "gamma scale, action head");
  add(app, "alpha-c", o.alpha_c, "gamma scale, class head");
  add(app, "queue-n", o.queue_n, "confidence queue length");
  add(app, "workers", o.workers, "parallel runs");
  add(app, "eval-threads", o.eval_threads, "rollout threads per evaluation");
  add_env(app->add_flag("--no-checkpoints", o.no_checkpoints, "skip writing model checkpoints"),
          "no-checkpoints");
}

bench::ExperimentConfig build_config(const Options& o) {
  auto c = o.config.empty() ? bench::parse_config(nlohmann::json::object())
                            : bench::load_config(o.config);
  if (!o.setup.empty()) {
    const auto setup = setup_from_flag(o.setup);
    if (setup != c.setup) {
      c.setup = setup;
      c.counts = stream::Counts::defaults(setup);
    }
  }
  if (o.benchmark_seed) c.benchmark_seed = *o.benchmark_seed;
  if (o.train_per_task) {
    c.counts.train_per_task = *o.train_per_task;
    c.counts.train_by_task.clear();
  }
  if (o.valid_per_task) {
    c.counts.valid_seen_per_task = *o.valid_per_task;
    c.counts.valid_unseen_per_task = *o.valid_per_task;
  }
  if (o.no_balance) c.counts.balance = false;
  if (!o.methods.empty()) {
    c.methods.clear();
    for (const auto& m : o.methods) {
      const auto method = cl::parse_method(m);
      if (!method) throw bench::ConfigError("unknown method '" + m + "'");
      c.methods.push_back(*method);
    }
  }
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (!o.ordering.empty()) c.orderings = {ordering_from_flag(o.ordering)};
  if (o.memory_size) c.method.memory_size = *o.memory_size;
  if (o.alpha) c.method.alpha = *o.alpha;
  if (o.alpha_a) c.method.alpha_a = *o.alpha_a;
  if (o.alpha_c) c.method.alpha_c = *o.alpha_c;
  if (o.queue_n) c.method.queue_n = *o.queue_n;
  if (o.workers) c.workers = *o.workers;
  if (o.eval_threads) c.eval_threads = *o.eval_threads;
  if (o.no_checkpoints) c.write_checkpoints = false;
  c.method.validate();
  return c;
}

int cmd_gen(const Options& o) {
  const auto c = build_config(o);
  fs::create_directories(o.out);
  const auto b = stream::build_benchmark(c.setup, c.counts, c.benchmark_seed, c.eval_threads);
  std::ofstream manifest(fs::path(o.out) / "manifest.jsonl");
  stream::write_manifest(manifest, b);
  std::ofstream episodes(fs::path(o.out) / "episodes.jsonl");
  stream::write_episodes(episodes, b);
  std::cout << name(c.setup) << ": " << b.groups.size() << " tasks, " << b.train_size()
            << " training episodes -> " << o.out << "\n";
  return 0;
}

int cmd_train(const Options& o, bool single) {
  const auto c = build_config(o);
  if (single && (c.methods.size() != 1 || c.seeds.size() != 1 || c.orderings.size() != 1)) {
    throw bench::ConfigError("train runs one method, seed and ordering; use sweep for more");
  }
  fs::create_directories(o.out);
  const auto records = bench::run_experiment(c, o.out);
  const auto summary = bench::summarize(records);
  std::cout << bench::format_table(summary);
  for (const auto& m : summary.missing) std::cerr << "incomplete: " << m << "\n";
  return 0;
}

int cmd_report(const std::string& results, const std::string& out, std::size_t window) {
  const fs::path dir(results);
  std::ifstream in(dir / "records.jsonl");
  if (!in) throw std::runtime_error("cannot open " + (dir / "records.jsonl").string());
  const auto records = bench::read_records(in);
  const auto summary = bench::summarize(records);
  const fs::path out_dir = out.empty() ? dir : fs::path(out);
  fs::create_directories(out_dir);

  const auto table = bench::format_table(summary);
  std::cout << table;
  std::ofstream(out_dir / "summary.txt") << table;
  std::ofstream(out_dir / "summary.json") << bench::summary_json(summary).dump(2) << "\n";
  for (const auto& m : summary.missing) std::cerr << "incomplete: " << m << "\n";

  const auto traces = dir / "traces";
  if (!fs::exists(traces)) return 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(traces)) {
    if (e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ofstream diag(out_dir / "diagnostic.csv");
  diag << "run,step,head,class,gamma,accuracy\n";
  std::cout << "\nconfidence/accuracy Spearman, mean over classes (action head, class head)\n";
  for (const auto& f : files) {
    std::ifstream t(f);
    const auto rows = bench::read_trace_csv(t);
    const auto run = f.stem().string();
    bench::write_diagnostic_csv(diag, run, rows, 'a', window);
    bench::write_diagnostic_csv(diag, run, rows, 'c', window);
    const auto a = bench::confidence_accuracy(rows, 'a', window);
    const auto c = bench::confidence_accuracy(rows, 'c', window);
    std::cout << "  " << run << ": " << a.mean_rho << " (" << a.per_class.size() << " classes), "
              << c.mean_rho << " (" << c.per_class.size() << " classes)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MiniALFRED continual imitation learning benchmark"};
  app.require_subcommand(1);

  Options gen_opts;
  auto* gen = app.add_subcommand("gen", "build a benchmark and write its manifest");
  add_benchmark_flags(gen, gen_opts);
  add(gen, "eval-threads", gen_opts.eval_threads, "generation threads");

  Options train_opts;
  auto* train = app.add_subcommand("train", "one method, seed and ordering");
  add_benchmark_flags(train, train_opts);
  add_training_flags(train, train_opts);

  Options sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "methods x orderings x seeds");
  add_benchmark_flags(sweep, sweep_opts);
  add_training_flags(sweep, sweep_opts);

  std::string report_in;
  std::string report_out;
  std::size_t window = 50;
  auto* report = app.add_subcommand("report", "summary tables and diagnostics");
  add_env(report->add_option("results", report_in, "results directory")->required(), "results");
  add(report, "out", report_out, "output directory (defaults to the results directory)");
  add(report, "window", window, "running accuracy window for the diagnostic");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(gen_opts);
    if (*train) return cmd_train(train_opts, true);
    if (*sweep) return cmd_train(sweep_opts, false);
    if (*report) return cmd_report(report_in, report_out, window);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
