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

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "dialight/core/types.hpp"

#include "json.hpp"

namespace dialight {

enum class ViolationKind { kUnknownDomain, kUnknownSlot, kCategorical, kTimeFormat, kNumberFormat };

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  StateTriple triple;
  std::string message;
};

// One Violation per triple that breaks its SlotSpec. Values are compared in
// normalized form; an empty result means the state is ontology-valid.
std::vector<Violation> validate_state(const DialogueState& state, const Ontology& ontology);

bool is_valid_time(std::string_view value);    // hh:mm, 00-23 / 00-59
bool is_valid_number(std::string_view value);  // non-negative integer

struct LoadWarning {
  std::string where;  // e.g. "SNG0073/turn 2"
  std::string message;
};

struct LoadOptions {
  // Slot values that mean "not set" in MultiWOZ metadata.
  std::set<std::string> empty_values = {"", "not mentioned", "none"};
  std::string language = "eng";
  std::string split = "test";
};

struct Dataset {
  Corpus corpus;
  Ontology ontology;
  std::vector<LoadWarning> warnings;
};

// Ontology file: {"domain-slot": {"kind": ..., "values": [...]}} or the short
// form {"domain-slot": "<kind>"}.
Ontology parse_ontology(const nlohmann::json& j);
Ontology load_ontology(const std::filesystem::path& path);

// Accepts MultiWOZ 2.x data.json (id -> {goal, log}) or the simplified
// fixture format ({"dialogues": [...]}). Unknown slots become warnings.
Corpus parse_corpus(const nlohmann::json& j, const Ontology& ontology, const LoadOptions& options,
                    std::vector<LoadWarning>* warnings);

Dataset load_dataset(const std::filesystem::path& corpus_path,
                     const std::filesystem::path& ontology_path,
                     const LoadOptions& options = {});

// Reads a JSON file, raising ParseError with line/column context on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Nested {"domain": {"slot": "value"}} with names normalized.
DialogueState state_from_json(const nlohmann::json& j, const std::set<std::string>& empty_values = {});
nlohmann::json state_to_json(const DialogueState& state);

Goal goal_from_json(const nlohmann::json& j);
nlohmann::json goal_to_json(const Goal& goal);

}  // namespace dialight
