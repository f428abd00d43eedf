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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dialight/core/types.hpp"

#include "json.hpp"

namespace dialight::prompt {

struct PromptConfig {
  size_t n_icl_examples = 0;
  uint64_t rng_seed = 0;
  std::string target_language = "eng";
  size_t context_window = 10;  // must be >= 1
};

struct IclExample {
  std::string dialogue_id;
  size_t turn_index = 0;
  std::vector<Utterance> history;  // ends with the user utterance of the turn
  DialogueState gold_state;
  std::string gold_delex;
};

// Uniform sample of k turns without replacement, reproducible from `seed`.
// Throws ValidationError when k exceeds the corpus turn count.
std::vector<IclExample> select_icl_examples(const Corpus& corpus, size_t k, uint64_t seed);

// Section wording, editable without recompiling. Missing keys fall back to
// the built-in English wording.
struct PromptTemplates {
  std::map<std::string, std::string> dst;
  std::map<std::string, std::string> rg;
  std::map<std::string, std::string> language_names;

  static PromptTemplates defaults();
  static PromptTemplates from_json(const nlohmann::json& j);
  static PromptTemplates load(const std::filesystem::path& path);
};

// Names of the section headers, in prompt order.
extern const std::vector<std::string> kDstSections;  // six instruction parts
extern const std::vector<std::string> kRgSections;   // four instruction parts

// The last `window` utterances of history.
std::span<const Utterance> truncate_history(std::span<const Utterance> history, size_t window);

std::string build_dst_prompt(const Ontology& ontology, const std::vector<IclExample>& examples,
                             std::span<const Utterance> history, const PromptConfig& config,
                             const PromptTemplates& templates = PromptTemplates::defaults());

std::string build_rg_prompt(const Ontology& ontology, const std::vector<IclExample>& examples,
                            std::span<const Utterance> history, const std::string& db_summary,
                            const std::set<std::string>& placeholders, const PromptConfig& config,
                            const PromptTemplates& templates = PromptTemplates::defaults());

}  // namespace dialight::prompt
