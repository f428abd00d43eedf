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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialight/core/types.hpp"

namespace dialight::codec {

// Separators of the flattened state grammar:
//   domain # slot = value ; slot = value | domain # slot = value
inline constexpr std::string_view kDomainSep = " | ";
inline constexpr std::string_view kSlotsSep = " ; ";
inline constexpr std::string_view kDomainMark = " # ";
inline constexpr std::string_view kValueMark = " = ";

struct ParseOutcome {
  DialogueState state;
  bool compliant = true;
  std::vector<std::string> diagnostics;
};

// Domains and slots in lexicographic order. Triples whose parts contain a
// reserved separator are left out and reported through `diagnostics`.
std::string linearize_state(const DialogueState& state,
                            std::vector<std::string>* diagnostics = nullptr);

// Inverse of linearize_state. Never fails: segments that do not parse are
// skipped with a diagnostic and mark the outcome non-compliant.
ParseOutcome parse_linearized_state(std::string_view text, const Ontology& ontology);

// Finds the first balanced, syntactically valid JSON object in free text.
std::optional<std::string> extract_first_json_object(std::string_view text);

// Reads a state from model output containing a JSON object, either nested
// {"domain": {"slot": "value"}} or flat {"domain-slot": "value"}.
ParseOutcome parse_structured_state(std::string_view text, const Ontology& ontology);

// Linearized grammar unless the text contains '{', then JSON.
ParseOutcome parse_any_state(std::string_view text, const Ontology& ontology);

}  // namespace dialight::codec
