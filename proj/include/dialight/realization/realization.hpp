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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dialight/core/placeholders.hpp"
#include "dialight/core/types.hpp"
#include "dialight/db/database.hpp"

#include "json.hpp"

namespace dialight::realization {

inline constexpr std::string_view kUnknownMarker = "[unknown]";

// Union of placeholder tokens seen in the corpus' gold delexicalized responses.
std::set<std::string> placeholder_inventory(const Corpus& corpus);

// One clause per domain: `clause` with {domain} and {count} substituted, where
// {count} renders as `zero`, `one` or `many` (with {n} replaced by the count).
struct SummaryTemplate {
  std::string clause = "{domain} has {count}";
  std::string zero = "no result found";
  std::string one = "one result found";
  std::string many = "{n} results found";
  std::string separator = "; ";
};

class SummaryTemplates {
 public:
  // Ships the English template only.
  SummaryTemplates();

  void set(const std::string& language, SummaryTemplate t);
  // Throws NotFoundError when no template exists for the language.
  const SummaryTemplate& get(const std::string& language) const;
  bool has(const std::string& language) const;

  // {"summary.<lang>": "<clause>" | {clause, zero, one, many, separator}}
  static SummaryTemplates from_json(const nlohmann::json& j);

 private:
  std::map<std::string, SummaryTemplate> templates_;
};

std::string summarize_results(const std::map<std::string, size_t>& counts,
                              const std::string& language, const SummaryTemplates& templates);

// Domains whose triples differ between two states (added, changed or removed).
std::set<std::string> changed_domains(const DialogueState& before, const DialogueState& after);

// The domain changed most recently (largest turn index in `last_changed`);
// ties go to domains with retrieved entries, then to the smallest name.
std::optional<std::string> resolve_active_domain(const std::map<std::string, int>& last_changed,
                                                 const std::map<std::string, size_t>& counts);

struct LexicalizeResult {
  std::string text;
  size_t unresolved = 0;
};

// Fills each placeholder from the active domain's first retrieved entry, then
// from the state, then with kUnknownMarker. Substitution is literal.
LexicalizeResult lexicalize_detailed(const DelexResponse& delex, const DialogueState& state,
                                     const std::map<std::string, std::vector<db::DbEntry>>& entries,
                                     const std::optional<std::string>& active_domain,
                                     const db::MatchOptions& options = {});

std::string lexicalize(const DelexResponse& delex, const DialogueState& state,
                       const std::map<std::string, std::vector<db::DbEntry>>& entries,
                       const std::optional<std::string>& active_domain,
                       const db::MatchOptions& options = {});

}  // namespace dialight::realization
