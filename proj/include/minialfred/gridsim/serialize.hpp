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

#include <iosfwd>

#include "minialfred/gridsim/types.hpp"

namespace minialfred::sim {

inline constexpr int kLayoutSchemaVersion = 1;
inline constexpr int kTaskSchemaVersion = 1;

// JSON-lines: a header record followed by one record per object (layout) or
// per goal condition (task). See docs/formats.md.
void write_layout(std::ostream& out, const Layout& layout);
Layout read_layout(std::istream& in);

void write_task(std::ostream& out, const TaskSpec& task);
TaskSpec read_task(std::istream& in);

}  // namespace minialfred::sim
