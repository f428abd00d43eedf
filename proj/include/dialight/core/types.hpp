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

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dialight {

enum class Speaker { kUser, kSystem };

const char* to_string(Speaker s);
Speaker speaker_from_string(const std::string& s);

struct Utterance {
  Speaker speaker = Speaker::kUser;
  std::string text;
  std::string language = "eng";

  bool operator==(const Utterance&) const = default;
};

struct StateTriple {
  std::string domain;
  std::string slot;
  std::string value;

  bool operator==(const StateTriple&) const = default;
  auto operator<=>(const StateTriple&) const = default;
};

// A set of (domain, slot, value) triples with at most one value per
// (domain, slot). Iteration is ordered by domain, then slot.
class DialogueState {
 public:
  using Key = std::pair<std::string, std::string>;

  DialogueState() = default;
  DialogueState(std::initializer_list<StateTriple> triples);

  // Inserts or overwrites the value for (domain, slot).
  void set(const std::string& domain, const std::string& slot, std::string value);
  bool erase(const std::string& domain, const std::string& slot);
  std::optional<std::string> get(const std::string& domain, const std::string& slot) const;
  bool contains(const std::string& domain, const std::string& slot) const;

  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::vector<StateTriple> triples() const;
  std::set<std::string> domains() const;
  // Slot → value for one domain.
  std::map<std::string, std::string> domain_slots(const std::string& domain) const;

  const std::map<Key, std::string>& entries() const { return values_; }

  // Overwrite-merge: every triple of `update` replaces the same (domain, slot)
  // here; everything else persists.
  void merge(const DialogueState& update);

  bool operator==(const DialogueState&) const = default;

 private:
  std::map<Key, std::string> values_;
};

enum class SlotKind { kCategorical, kTime, kNumber, kOpen };

const char* to_string(SlotKind k);
SlotKind slot_kind_from_string(const std::string& s);

struct SlotSpec {
  std::string name;
  SlotKind kind = SlotKind::kOpen;
  // Normalized allowed values; non-empty exactly for categorical slots.
  std::set<std::string> allowed_values;
};

class Ontology {
 public:
  // Throws ValidationError when the categorical/value-set invariant breaks.
  void add_slot(const std::string& domain, SlotSpec spec);

  bool has_domain(const std::string& domain) const;
  const SlotSpec* find(const std::string& domain, const std::string& slot) const;
  std::vector<std::string> domains() const;
  const std::map<std::string, SlotSpec>& slots(const std::string& domain) const;
  size_t slot_count() const;

 private:
  std::map<std::string, std::map<std::string, SlotSpec>> domains_;
};

struct DomainGoal {
  std::map<std::string, std::string> informable;
  std::set<std::string> requestable;
  std::map<std::string, std::string> booking;

  bool operator==(const DomainGoal&) const = default;
};

struct Goal {
  std::map<std::string, DomainGoal> domains;

  bool operator==(const Goal&) const = default;
};

struct Placeholder {
  std::string token;  // "[value_<slot>]"
  std::string slot;
  size_t offset = 0;  // byte offset into the response text

  bool operator==(const Placeholder&) const = default;
};

struct DelexResponse {
  std::string text;
  std::vector<Placeholder> placeholders;

  bool operator==(const DelexResponse&) const = default;
};

struct Turn {
  Utterance user;
  Utterance system;
  DialogueState gold_state;
  DelexResponse gold_delex;
};

struct Dialogue {
  std::string id;
  Goal goal;
  bool has_goal = true;
  std::vector<Turn> turns;
};

struct Corpus {
  std::string language = "eng";
  std::string split = "test";
  std::map<std::string, Dialogue> dialogues;

  size_t turn_count() const;
};

}  // namespace dialight
