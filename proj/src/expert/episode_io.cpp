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

#include "json.hpp"
#include "minialfred/expert.hpp"

namespace minialfred::expert {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kSplitNames = {"train", "valid_seen", "valid_unseen"};

template <class T, class Parse>
T parse_field(const json& j, Parse parse, std::string_view what) {
  const auto s = j.get<std::string>();
  const auto v = parse(s);
  if (!v) throw std::runtime_error("unknown " + std::string(what) + ": " + s);
  return *v;
}

}  // namespace

std::string_view name(Split s) { return kSplitNames[static_cast<int>(s)]; }

std::optional<Split> parse_split(std::string_view s) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
    if (kSplitNames[i] == s) return static_cast<Split>(i);
  }
  return std::nullopt;
}

void write_episode(std::ostream& out, const Episode& e) {
  json steps = json::array();
  for (const auto& s : e.demo->steps) {
    steps.push_back({
        {"action", sim::name(s.action)},
        {"target", s.target_class ? json(sim::name(*s.target_class)) : json(nullptr)},
        {"progress", s.progress},
        {"features", s.features},
    });
  }
  const auto& t = e.task;
  json rec = {
      {"record", "episode"},
      {"version", kEpisodeSchemaVersion},
      {"id", e.id},
      {"split", name(e.split)},
      {"env_type", sim::name(e.env_type)},
      {"layout_id", e.layout_id},
      {"seen", e.seen},
      {"placement_seed", e.placement_seed},
      {"seed", e.seed},
      {"behavior", sim::name(t.behavior)},
      {"target_object", sim::name(t.target_object)},
      {"second_object", t.second_object ? json(sim::name(*t.second_object)) : json(nullptr)},
      {"target_receptacle", sim::name(t.target_receptacle)},
      {"instruction", e.demo->instruction},
      {"steps", steps},
  };
  out << rec.dump() << '\n';
}

std::optional<Episode> read_episode(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("record", "") != "episode") throw std::runtime_error("expected an episode record");
    const int v = j.at("version").get<int>();
    if (v != kEpisodeSchemaVersion) {
      throw std::runtime_error("unsupported episode schema version " + std::to_string(v));
    }
    Episode e;
    e.id = j.at("id").get<std::uint64_t>();
    e.split = parse_field<Split>(j.at("split"), parse_split, "split");
    e.env_type = parse_field<sim::EnvType>(j.at("env_type"), sim::parse_env_type, "env_type");
    e.layout_id = j.at("layout_id").get<int>();
    e.seen = j.at("seen").get<bool>();
    e.placement_seed = j.at("placement_seed").get<std::uint64_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    const auto behavior = parse_field<sim::Behavior>(j.at("behavior"), sim::parse_behavior, "behavior");
    const auto target =
        parse_field<sim::ObjectClass>(j.at("target_object"), sim::parse_object_class, "class");
    std::optional<sim::ObjectClass> second;
    if (!j.at("second_object").is_null()) {
      second = parse_field<sim::ObjectClass>(j.at("second_object"), sim::parse_object_class, "class");
    }
    const auto recep =
        parse_field<sim::ObjectClass>(j.at("target_receptacle"), sim::parse_object_class, "class");
    e.task = sim::make_task(behavior, target, second, recep);

    Demonstration d;
    d.instruction = j.at("instruction").get<std::vector<int>>();
    for (const auto& s : j.at("steps")) {
      DemoStep step;
      step.action = parse_field<sim::Action>(s.at("action"), sim::parse_action, "action");
      if (!s.at("target").is_null()) {
        step.target_class = parse_field<sim::ObjectClass>(s.at("target"), sim::parse_object_class, "class");
      }
      step.progress = s.at("progress").get<double>();
      step.features = s.at("features").get<sim::FeatureVector>();
      if (step.features.size() != static_cast<std::size_t>(sim::kFeatureDim)) {
        throw std::runtime_error("feature vector has wrong length");
      }
      d.steps.push_back(std::move(step));
    }
    e.demo = std::make_shared<const Demonstration>(std::move(d));
    return e;
  }
  return std::nullopt;
}

}  // namespace minialfred::expert
