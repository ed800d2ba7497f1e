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

#include "minialfred/gridsim/observe.hpp"
#include "minialfred/gridsim/serialize.hpp"
#include "minialfred/gridsim/sim.hpp"
#include "minialfred/gridsim/types.hpp"
#include "minialfred/gridsim/world.hpp"
