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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "minialfred/bench.hpp"

namespace minialfred::bench {
namespace {

constexpr const char* kMetrics[] = {"SR_last", "GC_last", "SR_avg", "GC_avg"};

struct RunKey {
  std::string method;
  std::string setup;
  int ordering = 0;
  std::uint64_t seed = 0;
  std::string split;
  auto tie() const { return std::tie(method, setup, ordering, seed, split); }
  bool operator<(const RunKey& o) const { return tie() < o.tie(); }
};

int method_rank(const std::string& m) {
  const auto parsed = cl::parse_method(m);
  return parsed ? static_cast<int>(*parsed) : 1000;
}

std::size_t task_count(const std::string& setup) {
  const auto s = stream::parse_setup(setup);
  if (!s) throw EvalError("unknown setup '" + setup + "' in results");
  return stream::task_keys(*s).size();
}

std::string percent(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Summary summarize(std::span<const RunRecord> records) {
  // Later records replace earlier ones for the same checkpoint.
  std::map<RunKey, std::map<int, const RunRecord*>> runs;
  for (const auto& r : records) {
    runs[{r.method, r.setup, r.ordering_id, r.seed, r.split}][r.task_index] = &r;
  }

  struct CellKey {
    int method_rank;
    std::string method;
    std::string setup;
    int split_rank;
    std::string split;
    int metric;
    auto tie() const { return std::tie(method_rank, method, setup, split_rank, split, metric); }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
  };
  std::map<CellKey, std::vector<double>> values;
  std::map<CellKey, bool> undefined;
  Summary out;

  for (const auto& [key, checkpoints] : runs) {
    const std::size_t n = task_count(key.setup);
    const bool joint = key.method == cl::name(cl::Method::Joint);
    const std::string label = key.method + "/" + key.setup + "/ordering " +
                              std::to_string(key.ordering) + "/seed " + std::to_string(key.seed) +
                              "/" + key.split;
    std::vector<double> sr, gc;
    bool complete = true;
    if (joint) {
      const auto it = checkpoints.find(static_cast<int>(n) - 1);
      complete = it != checkpoints.end();
      if (complete) {
        sr.push_back(it->second->sr);
        gc.push_back(it->second->gc);
      }
    } else {
      for (std::size_t j = 0; j < n && complete; ++j) {
        const auto it = checkpoints.find(static_cast<int>(j));
        complete = it != checkpoints.end();
        if (complete) {
          sr.push_back(it->second->sr);
          gc.push_back(it->second->gc);
        }
      }
    }
    if (!complete) {
      out.missing.push_back(label + ": " + std::to_string(checkpoints.size()) + " of " +
                            std::to_string(joint ? 1 : n) + " checkpoints");
      continue;
    }
    const auto a_sr = aggregate_incremental(sr);
    const auto a_gc = aggregate_incremental(gc);
    const int split_rank = key.split == "seen" ? 0 : 1;
    auto cell = [&](int metric) {
      return CellKey{method_rank(key.method), key.method, key.setup, split_rank, key.split, metric};
    };
    values[cell(0)].push_back(a_sr.last);
    values[cell(1)].push_back(a_gc.last);
    if (joint) {
      undefined[cell(2)] = true;
      undefined[cell(3)] = true;
    } else {
      values[cell(2)].push_back(a_sr.avg);
      values[cell(3)].push_back(a_gc.avg);
    }
  }

  std::map<CellKey, std::optional<MeanStd>> cells;
  for (const auto& [k, v] : values) cells[k] = mean_std(v);
  for (const auto& [k, _] : undefined) cells.try_emplace(k, std::nullopt);
  for (const auto& [k, v] : cells) {
    out.cells.push_back({k.method, k.setup, k.split, kMetrics[k.metric], v});
  }
  return out;
}

const SummaryCell* find_cell(const Summary& summary, std::string_view method,
                             std::string_view split, std::string_view metric) {
  for (const auto& c : summary.cells) {
    if (c.method == method && c.split == split && c.metric == metric) return &c;
  }
  return nullptr;
}

std::string format_table(const Summary& summary) {
  struct Row {
    std::string method, setup, split;
    std::map<std::string, std::string> metric;
    std::size_t n = 0;
  };
  std::vector<Row> rows;
  for (const auto& c : summary.cells) {
    if (rows.empty() || rows.back().method != c.method || rows.back().setup != c.setup ||
        rows.back().split != c.split) {
      rows.push_back({c.method, c.setup, c.split, {}, 0});
    }
    rows.back().metric[c.metric] = c.value ? percent(*c.value) : "−";
    if (c.value) rows.back().n = std::max(rows.back().n, c.value->n);
  }
  // Widths count UTF-8 code points so "±" and "−" line up.
  auto pad = [](std::string text, std::size_t width) {
    std::size_t glyphs = 0;
    for (unsigned char ch : text) glyphs += (ch & 0xC0) != 0x80;
    text.append(glyphs < width ? width - glyphs : 1, ' ');
    return text;
  };
  std::ostringstream os;
  os << pad("method", 12) << pad("setup", 16) << pad("split", 8) << pad("SR_last", 17)
     << pad("GC_last", 17) << pad("SR_avg", 17) << pad("GC_avg", 17) << "runs\n";
  for (const auto& r : rows) {
    auto get = [&](const char* m) {
      const auto it = r.metric.find(m);
      return it == r.metric.end() ? std::string("missing") : it->second;
    };
    os << pad(r.method, 12) << pad(r.setup, 16) << pad(r.split, 8) << pad(get("SR_last"), 17)
       << pad(get("GC_last"), 17) << pad(get("SR_avg"), 17) << pad(get("GC_avg"), 17) << r.n
       << '\n';
  }
  for (const auto& m : summary.missing) os << "missing: " << m << '\n';
  return os.str();
}

nlohmann::json summary_json(const Summary& summary) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : summary.cells) {
    nlohmann::json j = {{"method", c.method}, {"setup", c.setup}, {"split", c.split},
                        {"metric", c.metric}};
    if (c.value) {
      j["mean"] = c.value->mean;
      j["std"] = c.value->std;
      j["n"] = c.value->n;
    } else {
      j["mean"] = nullptr;
    }
    cells.push_back(j);
  }
  return {{"schema", kResultsSchemaVersion}, {"cells", cells}, {"missing", summary.missing}};
}

std::vector<TraceRow> trace_rows(std::span<const cl::StepLog> steps) {
  std::vector<TraceRow> rows;
  for (const auto& s : steps) {
    for (std::size_t i = 0; i < s.gamma_action.size(); ++i) {
      rows.push_back({s.stream_index, 'a', static_cast<int>(i), s.gamma_action[i],
                      s.memory_action_correct.at(i), s.memory_action_total.at(i)});
    }
    for (std::size_t i = 0; i < s.gamma_class.size(); ++i) {
      rows.push_back({s.stream_index, 'c', static_cast<int>(i), s.gamma_class[i],
                      s.memory_class_correct.at(i), s.memory_class_total.at(i)});
    }
  }
  return rows;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "step,head,class,gamma,correct,total\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%c,%d,%.17g,%d,%d\n", r.step, r.head, r.cls, r.gamma,
                  r.correct, r.total);
    out << buf;
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,head,class,gamma,correct,total") {
    throw EvalError("trace file lacks the expected header");
  }
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    char head = 0;
    if (std::sscanf(line.c_str(), "%zu,%c,%d,%lf,%d,%d", &r.step, &head, &r.cls, &r.gamma,
                    &r.correct, &r.total) != 6 ||
        (head != 'a' && head != 'c')) {
      throw EvalError("malformed trace line: " + line);
    }
    r.head = head;
    rows.push_back(r);
  }
  return rows;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EvalError("spearman: series lengths differ");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

struct Series {
  std::vector<std::size_t> step;
  std::vector<double> gamma;
  std::vector<double> accuracy;
};

std::map<int, Series> running_series(std::span<const TraceRow> rows, char head,
                                     std::size_t window) {
  std::map<int, std::vector<const TraceRow*>> by_class;
  for (const auto& r : rows) {
    if (r.head == head) by_class[r.cls].push_back(&r);
  }
  std::map<int, Series> out;
  for (auto& [cls, v] : by_class) {
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->step < b->step; });
    Series s;
    long correct = 0, total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      correct += v[i]->correct;
      total += v[i]->total;
      if (i >= window) {
        correct -= v[i - window]->correct;
        total -= v[i - window]->total;
      }
      if (total == 0) continue;
      s.step.push_back(v[i]->step);
      s.gamma.push_back(v[i]->gamma);
      s.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(total));
    }
    out[cls] = std::move(s);
  }
  return out;
}

}  // namespace

Diagnostic confidence_accuracy(std::span<const TraceRow> rows, char head, std::size_t window,
                               std::size_t min_points) {
  Diagnostic d;
  double sum = 0.0;
  for (const auto& [cls, s] : running_series(rows, head, window)) {
    if (s.gamma.size() < min_points) continue;
    d.per_class.push_back({cls, spearman(s.gamma, s.accuracy), s.gamma.size()});
    sum += d.per_class.back().rho;
  }
  if (!d.per_class.empty()) d.mean_rho = sum / static_cast<double>(d.per_class.size());
  return d;
}

void write_diagnostic_csv(std::ostream& out, std::string_view run, std::span<const TraceRow> rows,
                          char head, std::size_t window) {
  char buf[192];
  for (const auto& [cls, s] : running_series(rows, head, window)) {
    for (std::size_t i = 0; i < s.gamma.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%zu,%c,%d,%.6f,%.6f\n", s.step[i], head, cls, s.gamma[i],
                    s.accuracy[i]);
      out << run << buf;
    }
  }
}

}  // namespace minialfred::bench
