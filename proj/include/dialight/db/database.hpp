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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dialight/core/types.hpp"

#include "json.hpp"

namespace dialight::db {

struct DbEntry {
  std::string domain;
  std::map<std::string, std::string> attributes;  // normalized name -> verbatim value

  bool operator==(const DbEntry&) const = default;
};

// Entries keep file order; that order is the canonical result order.
class DomainDatabase {
 public:
  DomainDatabase() = default;
  DomainDatabase(std::string domain, std::vector<DbEntry> entries);

  const std::string& domain() const { return domain_; }
  const std::vector<DbEntry>& entries() const { return entries_; }
  // Attribute names present on at least one entry: the queryable columns.
  const std::set<std::string>& attribute_names() const { return attribute_names_; }

 private:
  std::string domain_;
  std::vector<DbEntry> entries_;
  std::set<std::string> attribute_names_;
};

enum class SlotMatch { kByKind, kExact, kFuzzy, kAtOrAfter, kAtOrBefore, kIgnore };

SlotMatch slot_match_from_string(const std::string& s);

struct MatchOptions {
  size_t threshold = 2;
  // Values meaning "no preference"; such constraints never filter.
  std::set<std::string> dontcare = {"dontcare", "don't care", "do n't care", "dont care", "any"};
  // domain -> state slot -> DB attribute name.
  std::map<std::string, std::map<std::string, std::string>> aliases;
  // domain -> state slot -> comparison override. kByKind follows the
  // ontology: exact for categorical slots, Levenshtein for the rest.
  std::map<std::string, std::map<std::string, SlotMatch>> slot_match;

  std::string attribute_for(const std::string& domain, const std::string& slot) const;
};

DomainDatabase parse_domain_database(const std::string& domain, const nlohmann::json& j);
DomainDatabase load_domain_database(const std::filesystem::path& path, const std::string& domain);

class Database {
 public:
  void add(DomainDatabase db);
  bool has_domain(const std::string& domain) const;
  // Throws NotFoundError for unknown domains.
  const DomainDatabase& get(const std::string& domain) const;
  std::vector<std::string> domains() const;

 private:
  std::map<std::string, DomainDatabase> domains_;
};

// Loads every "<domain>_db.json" file of a directory.
Database load_database_dir(const std::filesystem::path& dir);

// True when `entry` satisfies every DB-backed constraint in `constraints`
// (slot -> value).
bool entry_matches(const DbEntry& entry, const std::map<std::string, std::string>& constraints,
                   const DomainDatabase& db, const Ontology& ontology, const MatchOptions& options);

// Entries of `db` matching the state's triples for `domain`, in canonical
// order. Throws NotFoundError when `domain` is not the database's domain.
std::vector<DbEntry> query_domain(const DomainDatabase& db, const DialogueState& state,
                                  const std::string& domain, const Ontology& ontology,
                                  const MatchOptions& options);

std::vector<DbEntry> query_domain(const Database& db, const DialogueState& state,
                                  const std::string& domain, const Ontology& ontology,
                                  const MatchOptions& options);

}  // namespace dialight::db
