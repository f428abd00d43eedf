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

#include "dialight/core/types.hpp"

#include "dialight/core/error.hpp"

namespace dialight {

const char* to_string(Speaker s) { return s == Speaker::kUser ? "user" : "system"; }

Speaker speaker_from_string(const std::string& s) {
  if (s == "user") return Speaker::kUser;
  if (s == "system") return Speaker::kSystem;
  throw ParseError("speaker", "unknown speaker '" + s + "'");
}

DialogueState::DialogueState(std::initializer_list<StateTriple> triples) {
  for (const auto& t : triples) set(t.domain, t.slot, t.value);
}

void DialogueState::set(const std::string& domain, const std::string& slot, std::string value) {
  values_[{domain, slot}] = std::move(value);
}

bool DialogueState::erase(const std::string& domain, const std::string& slot) {
  return values_.erase({domain, slot}) > 0;
}

std::optional<std::string> DialogueState::get(const std::string& domain,
                                              const std::string& slot) const {
  auto it = values_.find({domain, slot});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

bool DialogueState::contains(const std::string& domain, const std::string& slot) const {
  return values_.count({domain, slot}) > 0;
}

std::vector<StateTriple> DialogueState::triples() const {
  std::vector<StateTriple> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back({key.first, key.second, value});
  return out;
}

std::set<std::string> DialogueState::domains() const {
  std::set<std::string> out;
  for (const auto& [key, value] : values_) out.insert(key.first);
  return out;
}

std::map<std::string, std::string> DialogueState::domain_slots(const std::string& domain) const {
  std::map<std::string, std::string> out;
  for (auto it = values_.lower_bound({domain, std::string()});
       it != values_.end() && it->first.first == domain; ++it) {
    out.emplace(it->first.second, it->second);
  }
  return out;
}

void DialogueState::merge(const DialogueState& update) {
  for (const auto& [key, value] : update.values_) values_[key] = value;
}

const char* to_string(SlotKind k) {
  switch (k) {
    case SlotKind::kCategorical: return "categorical";
    case SlotKind::kTime: return "time";
    case SlotKind::kNumber: return "number";
    case SlotKind::kOpen: return "open";
  }
  return "open";
}

SlotKind slot_kind_from_string(const std::string& s) {
  if (s == "categorical") return SlotKind::kCategorical;
  if (s == "time") return SlotKind::kTime;
  if (s == "number") return SlotKind::kNumber;
  if (s == "open") return SlotKind::kOpen;
  throw ParseError("kind", "unknown slot kind '" + s + "'");
}

void Ontology::add_slot(const std::string& domain, SlotSpec spec) {
  if (spec.kind == SlotKind::kCategorical && spec.allowed_values.empty()) {
    throw ValidationError("categorical slot " + domain + "-" + spec.name + " has no values");
  }
  if (spec.kind != SlotKind::kCategorical && !spec.allowed_values.empty()) {
    throw ValidationError("non-categorical slot " + domain + "-" + spec.name +
                          " must not list values");
  }
  auto name = spec.name;
  domains_[domain][name] = std::move(spec);
}

bool Ontology::has_domain(const std::string& domain) const { return domains_.count(domain) > 0; }

const SlotSpec* Ontology::find(const std::string& domain, const std::string& slot) const {
  auto d = domains_.find(domain);
  if (d == domains_.end()) return nullptr;
  auto s = d->second.find(slot);
  return s == d->second.end() ? nullptr : &s->second;
}

std::vector<std::string> Ontology::domains() const {
  std::vector<std::string> out;
  for (const auto& [name, slots] : domains_) out.push_back(name);
  return out;
}

const std::map<std::string, SlotSpec>& Ontology::slots(const std::string& domain) const {
  static const std::map<std::string, SlotSpec> kEmpty;
  auto d = domains_.find(domain);
  return d == domains_.end() ? kEmpty : d->second;
}

size_t Ontology::slot_count() const {
  size_t n = 0;
  for (const auto& [name, slots] : domains_) n += slots.size();
  return n;
}

size_t Corpus::turn_count() const {
  size_t n = 0;
  for (const auto& [id, d] : dialogues) n += d.turns.size();
  return n;
}

}  // namespace dialight
