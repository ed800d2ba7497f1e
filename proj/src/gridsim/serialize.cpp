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

#include "minialfred/gridsim/serialize.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace minialfred::sim {
namespace {

using nlohmann::json;

json read_record(std::istream& in, std::string_view expected) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.value("record", "") != expected) {
      throw std::runtime_error("expected '" + std::string(expected) + "' record, got: " + line);
    }
    return j;
  }
  throw std::runtime_error("unexpected end of input while reading '" + std::string(expected) + "'");
}

template <class T, class Parse>
T parse_or_throw(const json& j, Parse parse, std::string_view what) {
  const auto s = j.get<std::string>();
  const auto v = parse(s);
  if (!v) throw std::runtime_error("unknown " + std::string(what) + ": " + s);
  return *v;
}

void check_version(const json& j, int expected) {
  const int v = j.at("version").get<int>();
  if (v != expected) throw std::runtime_error("unsupported schema version " + std::to_string(v));
}

json cell_json(Cell c) { return json::array({c.row, c.col}); }
Cell cell_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

void write_layout(std::ostream& out, const Layout& layout) {
  json grid = json::array();
  for (const auto& row : layout.grid) {
    std::string s;
    for (Tile t : row) s += t == Tile::Wall ? '#' : t == Tile::Fixture ? 'F' : '.';
    grid.push_back(s);
  }
  json header = {
      {"record", "layout"},
      {"version", kLayoutSchemaVersion},
      {"env_type", name(layout.env_type)},
      {"layout_id", layout.layout_id},
      {"seen", layout.seen},
      {"style", layout.style},
      {"agent_start", cell_json(layout.agent_start)},
      {"start_heading", name(layout.start_heading)},
      {"grid", grid},
      {"object_count", layout.objects.size()},
  };
  out << header.dump() << '\n';
  for (const auto& o : layout.objects) {
    json bits = json::array();
    for (int b = 0; b < kNumStateBits; ++b) {
      if (o.state.get(static_cast<StateBit>(b))) bits.push_back(name(static_cast<StateBit>(b)));
    }
    json rec = {
        {"record", "object"},
        {"id", o.id},
        {"class", name(o.cls)},
        {"position", o.position ? cell_json(*o.position) : json(nullptr)},
        {"state", bits},
        {"contains", o.contains},
        {"ever_picked", o.ever_picked},
    };
    out << rec.dump() << '\n';
  }
}

Layout read_layout(std::istream& in) {
  const json h = read_record(in, "layout");
  check_version(h, kLayoutSchemaVersion);
  Layout layout;
  layout.env_type = parse_or_throw<EnvType>(h.at("env_type"), parse_env_type, "env_type");
  layout.layout_id = h.at("layout_id").get<int>();
  layout.seen = h.at("seen").get<bool>();
  layout.style = h.at("style").get<std::array<double, kStyleDim>>();
  layout.agent_start = cell_from(h.at("agent_start"));
  layout.start_heading = parse_or_throw<Heading>(h.at("start_heading"), parse_heading, "heading");
  const auto& grid = h.at("grid");
  if (grid.size() != kGridSize) throw std::runtime_error("grid must have 7 rows");
  for (int r = 0; r < kGridSize; ++r) {
    const auto row = grid.at(r).get<std::string>();
    if (row.size() != kGridSize) throw std::runtime_error("grid rows must have 7 cells");
    for (int c = 0; c < kGridSize; ++c) {
      layout.grid[r][c] = row[c] == '#' ? Tile::Wall : row[c] == 'F' ? Tile::Fixture : Tile::Floor;
    }
  }
  const auto count = h.at("object_count").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    const json j = read_record(in, "object");
    ObjectInstance o;
    o.id = j.at("id").get<int>();
    if (o.id != static_cast<int>(i)) throw std::runtime_error("object ids must be dense and ordered");
    o.cls = parse_or_throw<ObjectClass>(j.at("class"), parse_object_class, "object class");
    if (!j.at("position").is_null()) o.position = cell_from(j.at("position"));
    for (const auto& b : j.at("state")) {
      o.state.set(parse_or_throw<StateBit>(b, parse_state_bit, "state bit"), true);
    }
    o.contains = j.at("contains").get<std::vector<int>>();
    o.ever_picked = j.at("ever_picked").get<bool>();
    layout.objects.push_back(std::move(o));
  }
  return layout;
}

void write_task(std::ostream& out, const TaskSpec& task) {
  json header = {
      {"record", "task"},
      {"version", kTaskSchemaVersion},
      {"behavior", name(task.behavior)},
      {"target_object", name(task.target_object)},
      {"second_object", task.second_object ? json(name(*task.second_object)) : json(nullptr)},
      {"target_receptacle", name(task.target_receptacle)},
      {"condition_count", task.goal_conditions.size()},
  };
  out << header.dump() << '\n';
  for (const auto& gc : task.goal_conditions) {
    const char* pred = gc.predicate == Predicate::Picked ? "picked"
                       : gc.predicate == Predicate::On   ? "on"
                                                         : "state";
    json rec = {
        {"record", "condition"},
        {"predicate", pred},
        {"subject", name(gc.subject)},
        {"receptacle", gc.receptacle ? json(name(*gc.receptacle)) : json(nullptr)},
        {"bit", gc.bit ? json(name(*gc.bit)) : json(nullptr)},
    };
    out << rec.dump() << '\n';
  }
}

TaskSpec read_task(std::istream& in) {
  const json h = read_record(in, "task");
  check_version(h, kTaskSchemaVersion);
  TaskSpec t;
  t.behavior = parse_or_throw<Behavior>(h.at("behavior"), parse_behavior, "behavior");
  t.target_object = parse_or_throw<ObjectClass>(h.at("target_object"), parse_object_class, "class");
  if (!h.at("second_object").is_null()) {
    t.second_object =
        parse_or_throw<ObjectClass>(h.at("second_object"), parse_object_class, "class");
  }
  t.target_receptacle =
      parse_or_throw<ObjectClass>(h.at("target_receptacle"), parse_object_class, "class");
  const auto count = h.at("condition_count").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    const json j = read_record(in, "condition");
    GoalCondition gc;
    const auto pred = j.at("predicate").get<std::string>();
    if (pred == "picked") {
      gc.predicate = Predicate::Picked;
    } else if (pred == "on") {
      gc.predicate = Predicate::On;
    } else if (pred == "state") {
      gc.predicate = Predicate::State;
    } else {
      throw std::runtime_error("unknown predicate: " + pred);
    }
    gc.subject = parse_or_throw<ObjectClass>(j.at("subject"), parse_object_class, "class");
    if (!j.at("receptacle").is_null()) {
      gc.receptacle = parse_or_throw<ObjectClass>(j.at("receptacle"), parse_object_class, "class");
    }
    if (!j.at("bit").is_null()) {
      gc.bit = parse_or_throw<StateBit>(j.at("bit"), parse_state_bit, "state bit");
    }
    t.goal_conditions.push_back(gc);
  }
  return t;
}

}  // namespace minialfred::sim
