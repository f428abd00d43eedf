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

#include "dialight/db/database.hpp"

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"
#include "dialight/db/levenshtein.hpp"

namespace dialight::db {

DomainDatabase::DomainDatabase(std::string domain, std::vector<DbEntry> entries)
    : domain_(std::move(domain)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    for (const auto& [name, value] : e.attributes) attribute_names_.insert(name);
  }
}

SlotMatch slot_match_from_string(const std::string& s) {
  if (s == "kind") return SlotMatch::kByKind;
  if (s == "exact") return SlotMatch::kExact;
  if (s == "fuzzy") return SlotMatch::kFuzzy;
  if (s == "at_or_after") return SlotMatch::kAtOrAfter;
  if (s == "at_or_before") return SlotMatch::kAtOrBefore;
  if (s == "ignore") return SlotMatch::kIgnore;
  throw ParseError("slot_match", "unknown match mode '" + s + "'");
}

std::string MatchOptions::attribute_for(const std::string& domain, const std::string& slot) const {
  if (auto d = aliases.find(domain); d != aliases.end()) {
    if (auto s = d->second.find(slot); s != d->second.end()) return s->second;
  }
  return slot;
}

DomainDatabase parse_domain_database(const std::string& domain, const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError(domain + "_db", "expected an array of entries");
  std::vector<DbEntry> entries;
  entries.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    if (!item.is_object()) {
      throw ParseError(domain + "_db/" + std::to_string(i), "expected an object");
    }
    DbEntry e;
    e.domain = domain;
    for (const auto& [name, value] : item.items()) {
      // Nested objects and arrays (coordinates, price tables) are not queryable.
      std::string v;
      if (value.is_string()) {
        v = value.get<std::string>();
      } else if (value.is_number_integer()) {
        v = std::to_string(value.get<long long>());
      } else if (value.is_number()) {
        v = value.dump();
      } else {
        continue;
      }
      e.attributes[text::normalize(name)] = std::move(v);
    }
    if (e.attributes.empty()) {
      throw ParseError(domain + "_db/" + std::to_string(i), "entry has no attributes");
    }
    entries.push_back(std::move(e));
  }
  return DomainDatabase(domain, std::move(entries));
}

DomainDatabase load_domain_database(const std::filesystem::path& path, const std::string& domain) {
  return parse_domain_database(domain, read_json_file(path));
}

void Database::add(DomainDatabase db) {
  const std::string name = db.domain();
  domains_[name] = std::move(db);
}

bool Database::has_domain(const std::string& domain) const { return domains_.count(domain) > 0; }

const DomainDatabase& Database::get(const std::string& domain) const {
  auto it = domains_.find(domain);
  if (it == domains_.end()) throw NotFoundError("no database for domain '" + domain + "'");
  return it->second;
}

std::vector<std::string> Database::domains() const {
  std::vector<std::string> out;
  for (const auto& [name, db] : domains_) out.push_back(name);
  return out;
}

Database load_database_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError(dir.string(), "database directory does not exist");
  }
  Database db;
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(dir)) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    const std::string suffix = "_db.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string domain = text::normalize(name.substr(0, name.size() - suffix.size()));
    db.add(load_domain_database(path, domain));
  }
  return db;
}

namespace {

// "hh:mm" -> minutes since midnight, or -1.
int minutes_of(const std::string& v) {
  if (!is_valid_time(v)) return -1;
  return ((v[0] - '0') * 10 + (v[1] - '0')) * 60 + (v[3] - '0') * 10 + (v[4] - '0');
}

bool within_distance(const std::string& x, const std::string& y, size_t threshold) {
  if (x == y) return true;
  const std::u32string a = text::decode_utf8(x);
  const std::u32string b = text::decode_utf8(y);
  const size_t diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (diff > threshold) return false;
  return levenshtein(std::u32string_view(a), std::u32string_view(b)) <= threshold;
}

SlotMatch resolve_mode(const std::string& domain, const std::string& slot, const Ontology& ontology,
                       const MatchOptions& options) {
  if (auto d = options.slot_match.find(domain); d != options.slot_match.end()) {
    if (auto s = d->second.find(slot); s != d->second.end() && s->second != SlotMatch::kByKind) {
      return s->second;
    }
  }
  const SlotSpec* spec = ontology.find(domain, slot);
  return spec && spec->kind == SlotKind::kCategorical ? SlotMatch::kExact : SlotMatch::kFuzzy;
}

}  // namespace

bool entry_matches(const DbEntry& entry, const std::map<std::string, std::string>& constraints,
                   const DomainDatabase& db, const Ontology& ontology, const MatchOptions& options) {
  for (const auto& [slot, raw_value] : constraints) {
    const std::string wanted = text::normalize(raw_value);
    if (options.dontcare.count(wanted)) continue;
    const std::string attribute = text::normalize(options.attribute_for(db.domain(), slot));
    // Slots no entry carries (booking details) are not database constraints.
    if (!db.attribute_names().count(attribute)) continue;
    auto it = entry.attributes.find(attribute);
    if (it == entry.attributes.end()) return false;
    const std::string have = text::normalize(it->second);
    switch (resolve_mode(db.domain(), slot, ontology, options)) {
      case SlotMatch::kIgnore:
        break;
      case SlotMatch::kByKind:
      case SlotMatch::kExact:
        if (have != wanted) return false;
        break;
      case SlotMatch::kFuzzy:
        if (!within_distance(have, wanted, options.threshold)) return false;
        break;
      case SlotMatch::kAtOrAfter: {
        const int h = minutes_of(have), w = minutes_of(wanted);
        if (h < 0 || w < 0 || h < w) return false;
        break;
      }
      case SlotMatch::kAtOrBefore: {
        const int h = minutes_of(have), w = minutes_of(wanted);
        if (h < 0 || w < 0 || h > w) return false;
        break;
      }
    }
  }
  return true;
}

std::vector<DbEntry> query_domain(const DomainDatabase& db, const DialogueState& state,
                                  const std::string& domain, const Ontology& ontology,
                                  const MatchOptions& options) {
  if (domain != db.domain()) {
    throw NotFoundError("database holds domain '" + db.domain() + "', not '" + domain + "'");
  }
  const auto constraints = state.domain_slots(domain);
  std::vector<DbEntry> out;
  for (const auto& entry : db.entries()) {
    if (entry_matches(entry, constraints, db, ontology, options)) out.push_back(entry);
  }
  return out;
}

std::vector<DbEntry> query_domain(const Database& db, const DialogueState& state,
                                  const std::string& domain, const Ontology& ontology,
                                  const MatchOptions& options) {
  return query_domain(db.get(domain), state, domain, ontology, options);
}

}  // namespace dialight::db
