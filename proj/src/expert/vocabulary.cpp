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
#include <array>

#include "minialfred/expert.hpp"

namespace minialfred::expert {
namespace {

using sim::Behavior;

constexpr std::array<std::string_view, 28> kWords = {
    "<pad>", "examine", "the",   "under",  "put",        "on",    "heat",
    "then",  "it",      "cool",  "clean",  "and",        "in",    "table",
    "countertop", "shelf", "bed", "sofa", "microwave", "fridge", "sink",
    "lamp",  "apple",   "tomato", "mug",   "cd",         "cloth", "bowl",
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int class_token(sim::ObjectClass c) { return token_id(lower(sim::name(c))); }

}  // namespace

std::span<const std::string_view> vocabulary() { return kWords; }
int vocabulary_size() { return static_cast<int>(kWords.size()); }

int token_id(std::string_view word) {
  const auto it = std::find(kWords.begin(), kWords.end(), word);
  if (it == kWords.end()) throw std::out_of_range("word not in vocabulary: " + std::string(word));
  return static_cast<int>(it - kWords.begin());
}

std::vector<int> instruction_for(const sim::TaskSpec& task) {
  std::vector<int> out;
  auto words = [&](std::initializer_list<std::string_view> ws) {
    for (auto w : ws) out.push_back(token_id(w));
  };
  const int obj = class_token(task.target_object);
  const int recep = class_token(task.target_receptacle);
  switch (task.behavior) {
    case Behavior::Examine:
      words({"examine", "the"});
      out.push_back(obj);
      words({"under", "the", "lamp"});
      break;
    case Behavior::PickPlace:
      words({"put", "the"});
      out.push_back(obj);
      words({"on", "the"});
      out.push_back(recep);
      break;
    case Behavior::Heat:
    case Behavior::Cool:
    case Behavior::Clean:
      words({task.behavior == Behavior::Heat   ? "heat"
             : task.behavior == Behavior::Cool ? "cool"
                                               : "clean",
             "the"});
      out.push_back(obj);
      words({"then", "put", "it", "on", "the"});
      out.push_back(recep);
      break;
    case Behavior::Pick2Place:
      words({"put", "the"});
      out.push_back(obj);
      words({"and", "the"});
      out.push_back(class_token(task.second_object.value_or(task.target_object)));
      words({"on", "the"});
      out.push_back(recep);
      break;
    case Behavior::Movable:
      words({"put", "the"});
      out.push_back(obj);
      words({"in", "the", "bowl", "then", "put", "it", "on", "the"});
      out.push_back(recep);
      break;
  }
  return out;
}

std::string instruction_text(std::span<const int> tokens) {
  std::string s;
  for (int t : tokens) {
    if (t == sim::kPadToken) continue;
    if (!s.empty()) s += ' ';
    s += kWords.at(static_cast<std::size_t>(t));
  }
  return s;
}

}  // namespace minialfred::expert
