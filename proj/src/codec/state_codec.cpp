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

#include "dialight/codec/state_codec.hpp"

#include <map>

#include "dialight/core/dataset.hpp"
#include "dialight/core/text.hpp"

#include "json.hpp"

namespace dialight::codec {
namespace {

constexpr std::string_view kReserved[] = {kDomainSep, kSlotsSep, kDomainMark, kValueMark};

bool is_edge_char(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '|' || c == ';' || c == '#' ||
         c == '=';
}

// A part is linearizable when it cannot be confused with a separator, alone or
// next to one.
bool linearizable(std::string_view part) {
  if (part.empty()) return false;
  if (is_edge_char(part.front()) || is_edge_char(part.back())) return false;
  for (auto sep : kReserved) {
    if (part.find(sep) != std::string_view::npos) return false;
  }
  return true;
}

struct Accumulator {
  const Ontology& ontology;
  ParseOutcome outcome;
  std::map<DialogueState::Key, bool> seen;

  void fail(std::string message) {
    outcome.compliant = false;
    outcome.diagnostics.push_back(std::move(message));
  }

  void add(const std::string& domain_raw, const std::string& slot_raw, const std::string& value_raw) {
    const std::string domain = text::normalize(domain_raw);
    const std::string slot = text::normalize(slot_raw);
    const std::string value = text::trim(value_raw);
    if (domain.empty() || slot.empty()) {
      fail("empty domain or slot name");
      return;
    }
    if (!ontology.has_domain(domain)) {
      fail("unknown domain '" + domain + "'");
      return;
    }
    if (!ontology.find(domain, slot)) {
      fail("unknown slot '" + domain + "-" + slot + "'");
      return;
    }
    if (value.empty()) {
      fail("empty value for '" + domain + "-" + slot + "'");
      return;
    }
    if (seen.count({domain, slot})) fail("duplicate slot '" + domain + "-" + slot + "'");
    seen[{domain, slot}] = true;
    DialogueState single;
    single.set(domain, slot, value);
    for (const auto& v : validate_state(single, ontology)) fail(v.message);
    outcome.state.set(domain, slot, value);
  }
};

}  // namespace

std::string linearize_state(const DialogueState& state, std::vector<std::string>* diagnostics) {
  std::string out;
  std::string current_domain;
  bool domain_open = false;
  for (const auto& t : state.triples()) {
    if (!linearizable(t.domain) || !linearizable(t.slot) || !linearizable(t.value)) {
      if (diagnostics) {
        diagnostics->push_back("triple (" + t.domain + ", " + t.slot + ", " + t.value +
                               ") contains a reserved separator; omitted");
      }
      continue;
    }
    if (!domain_open || t.domain != current_domain) {
      if (domain_open) out += kDomainSep;
      out += t.domain;
      out += kDomainMark;
      current_domain = t.domain;
      domain_open = true;
    } else {
      out += kSlotsSep;
    }
    out += t.slot;
    out += kValueMark;
    out += t.value;
  }
  return out;
}

ParseOutcome parse_linearized_state(std::string_view input, const Ontology& ontology) {
  Accumulator acc{ontology, {}, {}};
  const std::string text = text::trim(input);
  if (text.empty()) return std::move(acc.outcome);

  // Spaced separators are the canonical form. Text without any spaced domain
  // mark is read with the compact single-character grammar, flagged.
  const bool compact = text.find(kDomainMark) == std::string::npos;
  if (compact) acc.fail("compact separators instead of the spaced form");
  const std::string_view domain_sep = compact ? std::string_view("|") : kDomainSep;
  const std::string_view domain_mark = compact ? std::string_view("#") : kDomainMark;
  const std::string_view slots_sep = compact ? std::string_view(";") : kSlotsSep;
  const std::string_view value_mark = compact ? std::string_view("=") : kValueMark;

  for (const auto& segment : text::split(text, domain_sep)) {
    const size_t mark = segment.find(domain_mark);
    if (mark == std::string::npos) {
      acc.fail("segment '" + segment + "' has no domain separator; skipped");
      continue;
    }
    const std::string domain = segment.substr(0, mark);
    const std::string body = segment.substr(mark + domain_mark.size());
    for (const auto& pair : text::split(body, slots_sep)) {
      const size_t eq = pair.find(value_mark);
      if (eq == std::string::npos) {
        acc.fail("slot-value pair '" + text::trim(pair) + "' has no '='; skipped");
        continue;
      }
      acc.add(domain, pair.substr(0, eq), pair.substr(eq + value_mark.size()));
    }
  }
  return std::move(acc.outcome);
}

std::optional<std::string> extract_first_json_object(std::string_view text) {
  for (size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    size_t end = std::string_view::npos;
    for (size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) continue;
    std::string candidate(text.substr(start, end - start + 1));
    if (nlohmann::json::accept(candidate)) return candidate;
  }
  return std::nullopt;
}

namespace {

std::optional<std::string> scalar_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return std::string(v.get<bool>() ? "yes" : "no");
  return std::nullopt;
}

}  // namespace

ParseOutcome parse_structured_state(std::string_view text, const Ontology& ontology) {
  Accumulator acc{ontology, {}, {}};
  const auto object = extract_first_json_object(text);
  if (!object) {
    acc.fail("no JSON object found");
    return std::move(acc.outcome);
  }
  const auto j = nlohmann::json::parse(*object);

  auto add_value = [&](const std::string& domain, const std::string& slot, const nlohmann::json& v) {
    if (v.is_null()) return;
    auto s = scalar_string(v);
    if (!s) {
      acc.fail("value of '" + domain + "-" + slot + "' is not a scalar");
      return;
    }
    if (text::trim(*s).empty()) return;
    acc.add(domain, slot, *s);
  };

  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      for (const auto& [slot, v] : value.items()) {
        if (v.is_object() && text::normalize(slot) == "book") {
          for (const auto& [inner, iv] : v.items()) add_value(key, "book" + inner, iv);
        } else {
          add_value(key, slot, v);
        }
      }
      continue;
    }
    const size_t dash = key.find('-');
    if (dash == std::string::npos) {
      acc.fail("key '" + key + "' is neither a domain object nor domain-slot");
      continue;
    }
    add_value(key.substr(0, dash), key.substr(dash + 1), value);
  }
  return std::move(acc.outcome);
}

ParseOutcome parse_any_state(std::string_view text, const Ontology& ontology) {
  if (text.find('{') != std::string_view::npos) return parse_structured_state(text, ontology);
  return parse_linearized_state(text, ontology);
}

}  // namespace dialight::codec
