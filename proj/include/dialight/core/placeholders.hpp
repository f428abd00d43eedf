// Copyright 2026 The DiaLight Authors.
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

#include <string>
#include <string_view>
#include <vector>

#include "dialight/core/types.hpp"

namespace dialight {

// All non-overlapping "[value_<name>]" tokens in `text`, left to right, with
// <name> restricted to [a-z0-9_]+.
std::vector<Placeholder> extract_placeholders(std::string_view text);

DelexResponse make_delex(std::string text);

}  // namespace dialight
