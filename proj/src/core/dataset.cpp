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

#include "dialight/core/dataset.hpp"

#include <fstream>
#include <sstream>

#include "dialight/core/error.hpp"
#include "dialight/core/placeholders.hpp"
#include "dialight/core/text.hpp"

namespace dialight {

using nlohmann::json;

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kUnknownDomain: return "unknown-domain";
    case ViolationKind::kUnknownSlot: return "unknown-slot";
    case ViolationKind::kCategorical: return "categorical";
    case ViolationKind::kTimeFormat: return "time-format";
    case ViolationKind::kNumberFormat: return "number-format";
  }
  return "unknown";
}

bool is_valid_time(std::string_view v) {
  if (v.size() != 5 || v[2] != ':') return false;
  for (size_t i : {0, 1, 3, 4}) {
    if (v[i] < '0' || v[i] > '9') return false;
  }
  int hh = (v[0] - '0') * 10 + (v[1] - '0');
  int mm = (v[3] - '0') * 10 + (v[4] - '0');
  return hh <= 23 && mm <= 59;
}

bool is_valid_number(std::string_view v) {
  if (v.empty()) return false;
  for (char c : v) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::vector<Violation> validate_state(const DialogueState& state, const Ontology& ontology) {
  std::vector<Violation> out;
  for (const auto& t : state.triples()) {
    if (!ontology.has_domain(t.domain)) {
      out.push_back({ViolationKind::kUnknownDomain, t, "unknown domain '" + t.domain + "'"});
      continue;
    }
    const SlotSpec* spec = ontology.find(t.domain, t.slot);
    if (spec == nullptr) {
      out.push_back({ViolationKind::kUnknownSlot, t,
                     "unknown slot '" + t.domain + "-" + t.slot + "'"});
      continue;
    }
    const std::string value = text::normalize(t.value);
    switch (spec->kind) {
      case SlotKind::kCategorical:
        if (!spec->allowed_values.count(value)) {
          out.push_back({ViolationKind::kCategorical, t,
                         "'" + t.value + "' is not an allowed value of " + t.domain + "-" + t.slot});
        }
        break;
      case SlotKind::kTime:
        if (!is_valid_time(value)) {
          out.push_back({ViolationKind::kTimeFormat, t, "'" + t.value + "' is not hh:mm"});
        }
        break;
      case SlotKind::kNumber:
        if (!is_valid_number(value)) {
          out.push_back({ViolationKind::kNumberFormat, t,
                         "'" + t.value + "' is not a non-negative integer"});
        }
        break;
      case SlotKind::kOpen:
        break;
    }
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < std::min(e.byte, content.size()) && i + 1 < e.byte; ++i) {
      if (content[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col),
                     e.what());
  }
}

Ontology parse_ontology(const json& j) {
  if (!j.is_object()) throw ParseError("ontology", "top level must be an object");
  Ontology ontology;
  for (const auto& [key, spec] : j.items()) {
    const auto dash = key.find('-');
    if (dash == std::string::npos) {
      throw ParseError("ontology/" + key, "key must have the form domain-slot");
    }
    SlotSpec slot;
    const std::string domain = text::normalize(key.substr(0, dash));
    slot.name = text::normalize(key.substr(dash + 1));
    try {
      if (spec.is_string()) {
        slot.kind = slot_kind_from_string(spec.get<std::string>());
      } else if (spec.is_object()) {
        slot.kind = slot_kind_from_string(spec.value("kind", std::string("open")));
        if (spec.contains("values")) {
          for (const auto& v : spec.at("values")) {
            slot.allowed_values.insert(text::normalize(v.get<std::string>()));
          }
        }
      } else {
        throw ParseError("", "expected a kind string or an object");
      }
      ontology.add_slot(domain, std::move(slot));
    } catch (const json::exception& e) {
      throw ParseError("ontology/" + key, e.what());
    } catch (const ParseError& e) {
      throw ParseError("ontology/" + key, e.what());
    } catch (const ValidationError& e) {
      throw ParseError("ontology/" + key, e.what());
    }
  }
  return ontology;
}

Ontology load_ontology(const std::filesystem::path& path) {
  json j = read_json_file(path);
  try {
    return parse_ontology(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

namespace {

std::string value_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  return std::string();
}

}  // namespace

DialogueState state_from_json(const json& j, const std::set<std::string>& empty_values) {
  DialogueState state;
  if (!j.is_object()) return state;
  for (const auto& [domain_raw, slots] : j.items()) {
    if (!slots.is_object()) continue;
    const std::string domain = text::normalize(domain_raw);
    for (const auto& [slot_raw, value] : slots.items()) {
      if (!value.is_primitive() || value.is_null()) continue;
      std::string v = text::trim(value_string(value));
      if (empty_values.count(text::normalize(v))) continue;
      if (v.empty()) continue;
      state.set(domain, text::normalize(slot_raw), std::move(v));
    }
  }
  return state;
}

json state_to_json(const DialogueState& state) {
  json j = json::object();
  for (const auto& t : state.triples()) j[t.domain][t.slot] = t.value;
  return j;
}

Goal goal_from_json(const json& j) {
  Goal goal;
  if (!j.is_object()) return goal;
  for (const auto& [domain_raw, g] : j.items()) {
    if (!g.is_object() || g.empty()) continue;
    if (!g.contains("info") && !g.contains("reqt") && !g.contains("book")) continue;
    DomainGoal dg;
    if (auto it = g.find("info"); it != g.end() && it->is_object()) {
      for (const auto& [k, v] : it->items()) {
        dg.informable[text::normalize(k)] = value_string(v);
      }
    }
    if (auto it = g.find("reqt"); it != g.end()) {
      if (it->is_array()) {
        for (const auto& v : *it) dg.requestable.insert(text::normalize(value_string(v)));
      } else if (it->is_object()) {
        for (const auto& [k, v] : it->items()) dg.requestable.insert(text::normalize(k));
      }
    }
    if (auto it = g.find("book"); it != g.end() && it->is_object()) {
      for (const auto& [k, v] : it->items()) {
        if (k == "invalid" || k == "pre_invoke" || !v.is_primitive()) continue;
        dg.booking[text::normalize(k)] = value_string(v);
      }
    }
    if (dg.informable.empty() && dg.requestable.empty() && dg.booking.empty()) continue;
    goal.domains[text::normalize(domain_raw)] = std::move(dg);
  }
  return goal;
}

json goal_to_json(const Goal& goal) {
  json j = json::object();
  for (const auto& [domain, g] : goal.domains) {
    json d;
    d["info"] = g.informable;
    d["reqt"] = g.requestable;
    d["book"] = g.booking;
    j[domain] = std::move(d);
  }
  return j;
}

namespace {

// MultiWOZ dialogue-act slot names to placeholder names.
std::string act_slot_to_placeholder(const std::string& slot) {
  static const std::map<std::string, std::string> kMap = {
      {"addr", "address"}, {"post", "postcode"}, {"ref", "reference"}, {"id", "id"},
      {"trainid", "id"},   {"leave", "leaveat"}, {"arrive", "arriveby"}, {"dest", "destination"},
      {"depart", "departure"}, {"ticket", "price"}, {"fee", "price"}, {"price", "pricerange"},
  };
  std::string s = text::normalize(slot);
  auto it = kMap.find(s);
  if (it != kMap.end()) return it->second;
  std::string out;
  for (char c : s) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') out.push_back(c);
  }
  return out;
}

// Replaces span_info word spans ([act, slot, value, first, last]) with
// placeholders over the whitespace-tokenized text.
std::string delex_from_spans(const std::string& text_in, const json& spans) {
  std::vector<std::string> words;
  std::istringstream ss(text_in);
  for (std::string w; ss >> w;) words.push_back(w);
  std::vector<std::string> replacement(words.size());
  std::vector<bool> covered(words.size(), false);
  for (const auto& span : spans) {
    if (!span.is_array() || span.size() < 5) continue;
    if (!span[3].is_number_integer() || !span[4].is_number_integer()) continue;
    long first = span[3].get<long>(), last = span[4].get<long>();
    if (first < 0 || last < first || static_cast<size_t>(last) >= words.size()) continue;
    std::string name = act_slot_to_placeholder(value_string(span[1]));
    if (name.empty()) continue;
    replacement[first] = "[value_" + name + "]";
    for (long i = first; i <= last; ++i) covered[i] = true;
  }
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (covered[i] && replacement[i].empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += covered[i] ? replacement[i] : words[i];
  }
  return out;
}

void check_state(const DialogueState& state, const Ontology& ontology, const std::string& where,
                 std::vector<LoadWarning>* warnings) {
  if (!warnings) return;
  for (const auto& v : validate_state(state, ontology)) warnings->push_back({where, v.message});
}

void check_goal(const Goal& goal, const Ontology& ontology, const std::string& where,
                std::vector<LoadWarning>* warnings) {
  if (!warnings) return;
  for (const auto& [domain, g] : goal.domains) {
    if (!ontology.has_domain(domain)) {
      warnings->push_back({where + "/goal", "unknown goal domain '" + domain + "'"});
      continue;
    }
    for (const auto& [slot, value] : g.informable) {
      if (!ontology.find(domain, slot)) {
        warnings->push_back({where + "/goal", "unknown informable slot '" + domain + "-" + slot + "'"});
      }
    }
    for (const auto& [slot, value] : g.booking) {
      if (!ontology.find(domain, slot) && !ontology.find(domain, "book" + slot)) {
        warnings->push_back({where + "/goal", "unknown booking slot '" + domain + "-" + slot + "'"});
      }
    }
  }
}

Utterance make_utterance(Speaker speaker, const std::string& text_in, const std::string& language,
                         const std::string& where) {
  if (text::trim(text_in).empty()) throw ParseError(where, "empty utterance text");
  return Utterance{speaker, text_in, language};
}

Dialogue parse_multiwoz_dialogue(const std::string& id, const json& d, const Ontology& ontology,
                                 const LoadOptions& options, std::vector<LoadWarning>* warnings) {
  Dialogue dialogue;
  dialogue.id = id;
  const std::string where = id;
  if (d.contains("goal")) {
    dialogue.goal = goal_from_json(d.at("goal"));
  } else {
    dialogue.has_goal = false;
    if (warnings) warnings->push_back({where, "dialogue has no goal"});
  }
  const json& log = d.at("log");
  if (!log.is_array()) throw ParseError(where + "/log", "expected an array");
  if (log.size() % 2 != 0 && warnings) {
    warnings->push_back({where, "odd number of log entries; trailing user turn dropped"});
  }
  for (size_t i = 0; i + 1 < log.size(); i += 2) {
    const std::string turn_where = where + "/log/" + std::to_string(i);
    const json& u = log[i];
    const json& s = log[i + 1];
    Turn turn;
    try {
      turn.user = make_utterance(Speaker::kUser, u.at("text").get<std::string>(), options.language,
                                 turn_where + "/text");
      const std::string sys_text = s.at("text").get<std::string>();
      turn.system = make_utterance(Speaker::kSystem, sys_text, options.language,
                                   where + "/log/" + std::to_string(i + 1) + "/text");
      std::string delex;
      if (s.contains("delex")) {
        delex = s.at("delex").get<std::string>();
      } else if (s.contains("text_delex")) {
        delex = s.at("text_delex").get<std::string>();
      } else if (s.contains("span_info")) {
        delex = delex_from_spans(sys_text, s.at("span_info"));
      } else {
        delex = sys_text;
      }
      turn.gold_delex = make_delex(std::move(delex));
      if (s.contains("metadata")) {
        json flat = json::object();
        for (const auto& [domain, parts] : s.at("metadata").items()) {
          if (!parts.is_object()) continue;
          if (auto semi = parts.find("semi"); semi != parts.end() && semi->is_object()) {
            for (const auto& [slot, value] : semi->items()) flat[domain][slot] = value;
          }
          if (auto book = parts.find("book"); book != parts.end() && book->is_object()) {
            for (const auto& [slot, value] : book->items()) {
              if (slot == "booked" || !value.is_primitive()) continue;
              flat[domain]["book" + slot] = value;
            }
          }
        }
        turn.gold_state = state_from_json(flat, options.empty_values);
      }
    } catch (const json::exception& e) {
      throw ParseError(turn_where, e.what());
    }
    check_state(turn.gold_state, ontology, where + "/turn " + std::to_string(i / 2), warnings);
    dialogue.turns.push_back(std::move(turn));
  }
  return dialogue;
}

Dialogue parse_fixture_dialogue(const std::string& id, const json& d, const Ontology& ontology,
                                const LoadOptions& options, const std::string& language,
                                std::vector<LoadWarning>* warnings) {
  Dialogue dialogue;
  dialogue.id = id;
  const std::string where = id;
  if (d.contains("goal")) {
    dialogue.goal = goal_from_json(d.at("goal"));
  } else {
    dialogue.has_goal = false;
    if (warnings) warnings->push_back({where, "dialogue has no goal"});
  }
  const json& turns = d.at("turns");
  if (!turns.is_array()) throw ParseError(where + "/turns", "expected an array");
  for (size_t i = 0; i < turns.size(); ++i) {
    const std::string turn_where = where + "/turns/" + std::to_string(i);
    const json& t = turns[i];
    Turn turn;
    try {
      turn.user = make_utterance(Speaker::kUser, t.at("user").get<std::string>(), language,
                                 turn_where + "/user");
      turn.system = make_utterance(Speaker::kSystem, t.at("system").get<std::string>(), language,
                                   turn_where + "/system");
      turn.gold_delex = make_delex(t.value("system_delex", turn.system.text));
      turn.gold_state = state_from_json(t.value("state", json::object()), options.empty_values);
    } catch (const json::exception& e) {
      throw ParseError(turn_where, e.what());
    }
    check_state(turn.gold_state, ontology, where + "/turn " + std::to_string(i), warnings);
    dialogue.turns.push_back(std::move(turn));
  }
  return dialogue;
}

}  // namespace

Corpus parse_corpus(const json& j, const Ontology& ontology, const LoadOptions& options,
                    std::vector<LoadWarning>* warnings) {
  if (!j.is_object()) throw ParseError("corpus", "top level must be an object");
  Corpus corpus;
  corpus.language = options.language;
  corpus.split = options.split;

  auto add = [&](Dialogue d) {
    if (d.turns.empty()) {
      if (warnings) warnings->push_back({d.id, "dialogue has no turns; skipped"});
      return;
    }
    if (d.has_goal) check_goal(d.goal, ontology, d.id, warnings);
    const std::string id = d.id;
    if (!corpus.dialogues.emplace(id, std::move(d)).second) {
      throw ParseError("corpus/" + id, "duplicate dialogue id");
    }
  };

  if (j.contains("dialogues")) {
    corpus.language = j.value("language", options.language);
    corpus.split = j.value("split", options.split);
    const json& dialogues = j.at("dialogues");
    if (dialogues.is_array()) {
      for (size_t i = 0; i < dialogues.size(); ++i) {
        const json& d = dialogues[i];
        if (!d.contains("id") || !d.at("id").is_string()) {
          throw ParseError("dialogues/" + std::to_string(i), "missing string field 'id'");
        }
        add(parse_fixture_dialogue(d.at("id").get<std::string>(), d, ontology, options,
                                   corpus.language, warnings));
      }
    } else if (dialogues.is_object()) {
      for (const auto& [id, d] : dialogues.items()) {
        add(parse_fixture_dialogue(id, d, ontology, options, corpus.language, warnings));
      }
    } else {
      throw ParseError("dialogues", "expected an array or object");
    }
    return corpus;
  }

  for (const auto& [id, d] : j.items()) {
    if (!d.is_object() || !d.contains("log")) {
      throw ParseError(id, "expected a MultiWOZ dialogue object with a 'log' field");
    }
    add(parse_multiwoz_dialogue(id, d, ontology, options, warnings));
  }
  return corpus;
}

Dataset load_dataset(const std::filesystem::path& corpus_path,
                     const std::filesystem::path& ontology_path, const LoadOptions& options) {
  Dataset ds;
  ds.ontology = load_ontology(ontology_path);
  json j = read_json_file(corpus_path);
  try {
    ds.corpus = parse_corpus(j, ds.ontology, options, &ds.warnings);
  } catch (const ParseError& e) {
    throw ParseError(corpus_path.string(), e.what());
  }
  return ds;
}

}  // namespace dialight
