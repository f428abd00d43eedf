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

#include "dialight/realization/realization.hpp"

#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"

namespace dialight::realization {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::set<std::string> placeholder_inventory(const Corpus& corpus) {
  std::set<std::string> out;
  for (const auto& [id, dialogue] : corpus.dialogues) {
    for (const auto& turn : dialogue.turns) {
      for (const auto& p : turn.gold_delex.placeholders) out.insert(p.token);
    }
  }
  return out;
}

SummaryTemplates::SummaryTemplates() { templates_["eng"] = SummaryTemplate{}; }

void SummaryTemplates::set(const std::string& language, SummaryTemplate t) {
  templates_[language] = std::move(t);
}

const SummaryTemplate& SummaryTemplates::get(const std::string& language) const {
  auto it = templates_.find(language);
  if (it == templates_.end()) {
    throw NotFoundError("no summary template for language '" + language + "'");
  }
  return it->second;
}

bool SummaryTemplates::has(const std::string& language) const {
  return templates_.count(language) > 0;
}

SummaryTemplates SummaryTemplates::from_json(const nlohmann::json& j) {
  SummaryTemplates out;
  if (!j.is_object()) return out;
  const std::string prefix = "summary.";
  for (const auto& [key, value] : j.items()) {
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string lang = key.substr(prefix.size());
    SummaryTemplate t;
    if (value.is_string()) {
      t.clause = value.get<std::string>();
    } else if (value.is_object()) {
      t.clause = value.value("clause", t.clause);
      t.zero = value.value("zero", t.zero);
      t.one = value.value("one", t.one);
      t.many = value.value("many", t.many);
      t.separator = value.value("separator", t.separator);
    } else {
      throw ParseError(key, "summary template must be a string or an object");
    }
    out.set(lang, std::move(t));
  }
  return out;
}

std::string summarize_results(const std::map<std::string, size_t>& counts,
                              const std::string& language, const SummaryTemplates& templates) {
  const SummaryTemplate& t = templates.get(language);
  std::string out;
  for (const auto& [domain, n] : counts) {
    std::string count;
    if (n == 0) {
      count = t.zero;
    } else if (n == 1) {
      count = t.one;
    } else {
      count = t.many;
      replace_all(count, "{n}", std::to_string(n));
    }
    std::string clause = t.clause;
    replace_all(clause, "{domain}", domain);
    replace_all(clause, "{count}", count);
    if (!out.empty()) out += t.separator;
    out += clause;
  }
  return out;
}

std::set<std::string> changed_domains(const DialogueState& before, const DialogueState& after) {
  std::set<std::string> out;
  for (const auto& [key, value] : after.entries()) {
    auto it = before.entries().find(key);
    if (it == before.entries().end() || it->second != value) out.insert(key.first);
  }
  for (const auto& [key, value] : before.entries()) {
    if (!after.entries().count(key)) out.insert(key.first);
  }
  return out;
}

std::optional<std::string> resolve_active_domain(const std::map<std::string, int>& last_changed,
                                                 const std::map<std::string, size_t>& counts) {
  if (last_changed.empty()) return std::nullopt;
  int latest = last_changed.begin()->second;
  for (const auto& [domain, turn] : last_changed) latest = std::max(latest, turn);
  std::optional<std::string> first_tied;
  for (const auto& [domain, turn] : last_changed) {
    if (turn != latest) continue;
    if (!first_tied) first_tied = domain;
    auto c = counts.find(domain);
    if (c != counts.end() && c->second > 0) return domain;
  }
  return first_tied;
}

LexicalizeResult lexicalize_detailed(const DelexResponse& delex, const DialogueState& state,
                                     const std::map<std::string, std::vector<db::DbEntry>>& entries,
                                     const std::optional<std::string>& active_domain,
                                     const db::MatchOptions& options) {
  LexicalizeResult result;
  const db::DbEntry* first = nullptr;
  if (active_domain) {
    auto it = entries.find(*active_domain);
    if (it != entries.end() && !it->second.empty()) first = &it->second.front();
  }

  auto resolve = [&](const std::string& slot) -> std::optional<std::string> {
    if (!active_domain) return std::nullopt;
    if (first) {
      const std::string attribute = text::normalize(options.attribute_for(*active_domain, slot));
      auto a = first->attributes.find(attribute);
      if (a != first->attributes.end()) return a->second;
    }
    if (auto v = state.get(*active_domain, slot)) return v;
    // Booking slots are tracked as "book<slot>".
    if (auto v = state.get(*active_domain, "book" + slot)) return v;
    return std::nullopt;
  };

  size_t cursor = 0;
  for (const auto& p : delex.placeholders) {
    result.text.append(delex.text, cursor, p.offset - cursor);
    if (auto value = resolve(p.slot)) {
      result.text += *value;
    } else {
      result.text += kUnknownMarker;
      ++result.unresolved;
    }
    cursor = p.offset + p.token.size();
  }
  result.text.append(delex.text, cursor, std::string::npos);
  return result;
}

std::string lexicalize(const DelexResponse& delex, const DialogueState& state,
                       const std::map<std::string, std::vector<db::DbEntry>>& entries,
                       const std::optional<std::string>& active_domain,
                       const db::MatchOptions& options) {
  return lexicalize_detailed(delex, state, entries, active_domain, options).text;
}

}  // namespace dialight::realization
