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
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "minialfred/bench.hpp"

namespace minialfred::bench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key + ": wrong type (" + std::string(j.type_name()) + ")");
  }
}

std::vector<cl::Method> parse_methods(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("methods: expected a non-empty list");
  std::vector<cl::Method> out;
  for (const auto& m : j) {
    const auto s = get_as<std::string>(m, "methods");
    const auto method = cl::parse_method(s);
    if (!method) throw ConfigError("methods: unknown method '" + s + "'");
    out.push_back(*method);
  }
  return out;
}

std::vector<OrderingSpec> parse_orderings(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("orderings: expected a non-empty list");
  std::vector<OrderingSpec> out;
  for (const auto& o : j) {
    if (o.is_number_integer()) {
      out.push_back({o.get<int>(), {}});
    } else if (o.is_object()) {
      for (const auto& [k, _] : o.items()) {
        if (k != "id" && k != "keys") throw ConfigError("orderings." + k + ": unknown key");
      }
      if (!o.contains("id") || !o.contains("keys")) {
        throw ConfigError("orderings: explicit orderings need 'id' and 'keys'");
      }
      out.push_back({get_as<int>(o["id"], "orderings.id"),
                     get_as<std::vector<std::string>>(o["keys"], "orderings.keys")});
    } else {
      throw ConfigError("orderings: expected preset indices or {id, keys} objects");
    }
  }
  return out;
}

class Appender {
 public:
  explicit Appender(const fs::path& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
  }
  void write(const RunRecord& r) {
    std::lock_guard lock(mu_);
    out_ << to_json(r).dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace

stream::Ordering resolve_ordering(stream::Setup setup, const OrderingSpec& spec) {
  if (spec.keys.empty()) {
    if (spec.id < 1 || spec.id > 5) {
      throw ConfigError("orderings: preset index " + std::to_string(spec.id) + " not in [1, 5]");
    }
    return stream::preset_ordering(setup, spec.id);
  }
  try {
    return stream::make_task_ordering(setup, spec.keys);
  } catch (const stream::BenchmarkError& e) {
    throw ConfigError(std::string("orderings: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  if (j.contains("setup")) {
    const auto s = get_as<std::string>(j["setup"], "setup");
    const auto setup = stream::parse_setup(s);
    if (!setup) throw ConfigError("setup: unknown setup '" + s + "'");
    c.setup = *setup;
  }
  c.counts = stream::Counts::defaults(c.setup);
  // An explicit uniform count replaces the setup's per-task defaults; any
  // train_by_task entries still apply on top.
  if (j.contains("train_per_task")) {
    c.counts.train_per_task = get_as<int>(j["train_per_task"], "train_per_task");
    c.counts.train_by_task.clear();
  }
  auto& m = c.method;
  for (const auto& [key, v] : j.items()) {
    if (key == "setup" || key == "train_per_task") {
    } else if (key == "methods") {
      c.methods = parse_methods(v);
    } else if (key == "seeds") {
      c.seeds = get_as<std::vector<std::uint64_t>>(v, key);
      if (c.seeds.empty()) throw ConfigError("seeds: expected a non-empty list");
    } else if (key == "orderings") {
      c.orderings = parse_orderings(v);
    } else if (key == "benchmark_seed") {
      c.benchmark_seed = get_as<std::uint64_t>(v, key);
    } else if (key == "train_by_task") {
      c.counts.train_by_task = get_as<std::map<std::string, int>>(v, key);
    } else if (key == "valid_seen_per_task") {
      c.counts.valid_seen_per_task = get_as<int>(v, key);
    } else if (key == "valid_unseen_per_task") {
      c.counts.valid_unseen_per_task = get_as<int>(v, key);
    } else if (key == "balance") {
      c.counts.balance = get_as<bool>(v, key);
    } else if (key == "workers") {
      c.workers = get_as<unsigned>(v, key);
    } else if (key == "eval_threads") {
      c.eval_threads = get_as<unsigned>(v, key);
    } else if (key == "checkpoints") {
      c.write_checkpoints = get_as<bool>(v, key);
    } else if (key == "alpha") {
      m.alpha = get_as<double>(v, key);
    } else if (key == "alpha_a") {
      m.alpha_a = get_as<double>(v, key);
    } else if (key == "alpha_c") {
      m.alpha_c = get_as<double>(v, key);
    } else if (key == "queue_n") {
      m.queue_n = get_as<int>(v, key);
    } else if (key == "memory_size") {
      m.memory_size = get_as<int>(v, key);
    } else if (key == "ewc_lambda") {
      m.ewc_lambda = get_as<double>(v, key);
    } else if (key == "fisher_decay") {
      m.fisher_decay = get_as<double>(v, key);
    } else if (key == "anchor_every") {
      m.anchor_every = get_as<int>(v, key);
    } else if (key == "stream_batch") {
      m.stream_batch = get_as<int>(v, key);
    } else if (key == "memory_batch") {
      m.memory_batch = get_as<int>(v, key);
    } else if (key == "joint_epochs") {
      m.joint_epochs = get_as<int>(v, key);
    } else if (key == "orientation") {
      const auto s = get_as<std::string>(v, key);
      if (s == "current") {
        m.orientation = cl::GammaOrientation::CurrentWeighted;
      } else if (s == "old") {
        m.orientation = cl::GammaOrientation::OldWeighted;
      } else {
        throw ConfigError("orientation: expected 'current' or 'old'");
      }
    } else if (key == "hidden") {
      m.policy.hidden = get_as<int>(v, key);
    } else if (key == "embed") {
      m.policy.embed = get_as<int>(v, key);
    } else if (key == "lr") {
      m.lr.base = get_as<double>(v, key);
    } else if (key == "lr_decay") {
      m.lr.decay = get_as<double>(v, key);
    } else if (key == "lr_period") {
      m.lr.period = get_as<int>(v, key);
    } else if (key == "loss_action") {
      m.loss_weights.action = get_as<double>(v, key);
    } else if (key == "loss_class") {
      m.loss_weights.cls = get_as<double>(v, key);
    } else if (key == "loss_progress") {
      m.loss_weights.progress = get_as<double>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.workers == 0) throw ConfigError("workers: must be at least 1");
  if (c.counts.train_per_task < 1) throw ConfigError("train_per_task: must be at least 1");
  if (c.counts.valid_seen_per_task < 1) throw ConfigError("valid_seen_per_task: must be at least 1");
  if (c.counts.valid_unseen_per_task < 1) {
    throw ConfigError("valid_unseen_per_task: must be at least 1");
  }
  const auto keys = stream::task_keys(c.setup);
  for (const auto& [k, n] : c.counts.train_by_task) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError("train_by_task: unknown task '" + k + "'");
    }
    if (n < 1) throw ConfigError("train_by_task." + k + ": must be at least 1");
  }
  for (const auto& o : c.orderings) resolve_ordering(c.setup, o);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(cl::name(m)));
  json orderings = json::array();
  for (const auto& o : c.orderings) {
    if (o.keys.empty()) {
      orderings.push_back(o.id);
    } else {
      orderings.push_back({{"id", o.id}, {"keys", o.keys}});
    }
  }
  const auto& m = c.method;
  return {{"setup", std::string(stream::name(c.setup))},
          {"methods", methods},
          {"seeds", c.seeds},
          {"orderings", orderings},
          {"benchmark_seed", c.benchmark_seed},
          {"train_per_task", c.counts.train_per_task},
          {"train_by_task", c.counts.train_by_task},
          {"valid_seen_per_task", c.counts.valid_seen_per_task},
          {"valid_unseen_per_task", c.counts.valid_unseen_per_task},
          {"balance", c.counts.balance},
          {"workers", c.workers},
          {"eval_threads", c.eval_threads},
          {"checkpoints", c.write_checkpoints},
          {"alpha", m.alpha},
          {"alpha_a", m.alpha_a},
          {"alpha_c", m.alpha_c},
          {"queue_n", m.queue_n},
          {"memory_size", m.memory_size},
          {"ewc_lambda", m.ewc_lambda},
          {"fisher_decay", m.fisher_decay},
          {"anchor_every", m.anchor_every},
          {"stream_batch", m.stream_batch},
          {"memory_batch", m.memory_batch},
          {"joint_epochs", m.joint_epochs},
          {"orientation",
           m.orientation == cl::GammaOrientation::CurrentWeighted ? "current" : "old"},
          {"hidden", m.policy.hidden},
          {"embed", m.policy.embed},
          {"lr", m.lr.base},
          {"lr_decay", m.lr.decay},
          {"lr_period", m.lr.period},
          {"loss_action", m.loss_weights.action},
          {"loss_class", m.loss_weights.cls},
          {"loss_progress", m.loss_weights.progress}};
}

std::string run_name(cl::Method method, int ordering_id, std::uint64_t seed) {
  return std::string(cl::name(method)) + "_o" + std::to_string(ordering_id) + "_s" +
         std::to_string(seed);
}

RunOutput run_single(const ExperimentConfig& config, const stream::Benchmark& benchmark,
                     cl::Method method, const OrderingSpec& ordering_spec, std::uint64_t seed,
                     const fs::path* out_dir) {
  const auto ordering = resolve_ordering(config.setup, ordering_spec);
  cl::MethodConfig mc = config.method;
  mc.method = method;
  const std::string run = run_name(method, ordering_spec.id, seed);
  const auto start = std::chrono::steady_clock::now();

  RunOutput out;
  auto on_checkpoint = [&](int task_index, const policy::PolicyModel& model) {
    if (out_dir && config.write_checkpoints) {
      const auto dir = *out_dir / "checkpoints";
      fs::create_directories(dir);
      std::ofstream f(dir / (run + "_task" + std::to_string(task_index) + ".bin"),
                      std::ios::binary);
      nn::save_checkpoint(f, model.params);
    }
    for (EvalSplit split : {EvalSplit::Seen, EvalSplit::Unseen}) {
      const auto episodes = learned_so_far(benchmark, ordering, task_index, split);
      const auto r = evaluate(model, episodes, split, config.eval_threads);
      RunRecord rec;
      rec.method = std::string(cl::name(method));
      rec.setup = std::string(stream::name(config.setup));
      rec.ordering_id = ordering_spec.id;
      rec.seed = seed;
      rec.task_index = task_index;
      rec.split = std::string(name(split));
      rec.sr = r.sr;
      rec.gc = r.gc;
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.records.push_back(rec);
    }
  };
  auto result = cl::run_continual_training(mc, benchmark, ordering, seed, on_checkpoint);
  out.steps = std::move(result.steps);

  if (out_dir) {
    fs::create_directories(*out_dir / "steps");
    std::ofstream steps(*out_dir / "steps" / (run + ".jsonl"));
    for (const auto& s : out.steps) cl::write_step_log(steps, s);
    if (method != cl::Method::Joint) {
      fs::create_directories(*out_dir / "traces");
      std::ofstream trace(*out_dir / "traces" / (run + ".csv"));
      write_trace_csv(trace, trace_rows(out.steps));
    }
  }
  return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "config.json");
    cfg << config_to_json(config).dump(2) << '\n';
  }
  const auto benchmark =
      stream::build_benchmark(config.setup, config.counts, config.benchmark_seed, config.workers);

  struct Job {
    cl::Method method;
    OrderingSpec ordering;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto m : config.methods) {
    for (const auto& o : config.orderings) {
      for (auto s : config.seeds) jobs.push_back({m, o, s});
    }
  }

  Appender appender(out_dir / "records.jsonl");
  std::vector<std::vector<RunRecord>> per_job(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& job = jobs[i];
        auto out = run_single(config, benchmark, job.method, job.ordering, job.seed, &out_dir);
        for (const auto& r : out.records) appender.write(r);
        per_job[i] = std::move(out.records);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<RunRecord> all;
  for (auto& v : per_job) all.insert(all.end(), v.begin(), v.end());
  return all;
}

}  // namespace minialfred::bench
