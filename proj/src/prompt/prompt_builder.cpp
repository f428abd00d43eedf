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

#include "dialight/prompt/prompt_builder.hpp"

#include <numeric>
#include <random>
#include <sstream>

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"

namespace dialight::prompt {

const std::vector<std::string> kDstSections = {"task",   "output-format", "ontology",
                                               "categorical-slots", "time-slots",
                                               "number-slots"};
const std::vector<std::string> kRgSections = {"task", "ontology", "delexicalisation", "language"};

namespace {

// Unbiased draw from [0, bound) on top of the raw 64-bit engine, so samples
// do not depend on the standard library's distribution implementation.
uint64_t draw_below(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void append_section(std::ostringstream& out, const std::string& name, const std::string& body) {
  out << "### " << name << "\n" << body;
  if (!body.empty() && body.back() != '\n') out << "\n";
  out << "\n";
}

std::string lookup(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? std::string() : it->second;
}

void render_history(std::ostringstream& out, std::span<const Utterance> history) {
  for (const auto& u : history) out << to_string(u.speaker) << ": " << u.text << "\n";
}

std::string ontology_listing(const Ontology& ontology) {
  std::ostringstream out;
  for (const auto& domain : ontology.domains()) {
    out << "- " << domain << ":";
    bool first = true;
    for (const auto& [name, spec] : ontology.slots(domain)) {
      out << (first ? " " : ", ") << name;
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

std::string slots_of_kind(const Ontology& ontology, SlotKind kind, bool with_values) {
  std::ostringstream out;
  for (const auto& domain : ontology.domains()) {
    for (const auto& [name, spec] : ontology.slots(domain)) {
      if (spec.kind != kind) continue;
      out << "- " << domain << "-" << name;
      if (with_values) {
        out << ":";
        bool first = true;
        for (const auto& v : spec.allowed_values) {
          out << (first ? " " : ", ") << v;
          first = false;
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string language_name(const PromptTemplates& templates, const std::string& tag) {
  auto it = templates.language_names.find(tag);
  return it == templates.language_names.end() ? tag : it->second;
}

}  // namespace

std::vector<IclExample> select_icl_examples(const Corpus& corpus, size_t k, uint64_t seed) {
  struct TurnRef {
    const Dialogue* dialogue;
    size_t turn;
  };
  std::vector<TurnRef> pool;
  for (const auto& [id, d] : corpus.dialogues) {
    for (size_t t = 0; t < d.turns.size(); ++t) pool.push_back({&d, t});
  }
  if (k > pool.size()) {
    throw ValidationError("cannot sample " + std::to_string(k) + " examples from " +
                          std::to_string(pool.size()) + " turns");
  }
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k slots end up a uniform sample.
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + draw_below(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<IclExample> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    const Dialogue& d = *pool[i].dialogue;
    IclExample ex;
    ex.dialogue_id = d.id;
    ex.turn_index = pool[i].turn;
    for (size_t t = 0; t <= pool[i].turn; ++t) {
      ex.history.push_back(d.turns[t].user);
      if (t < pool[i].turn) ex.history.push_back(d.turns[t].system);
    }
    ex.gold_state = d.turns[pool[i].turn].gold_state;
    ex.gold_delex = d.turns[pool[i].turn].gold_delex.text;
    out.push_back(std::move(ex));
  }
  return out;
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.dst = {
      {"task",
       "You are tracking the state of a task-oriented dialogue. Read the dialogue below and "
       "extract every constraint the user has expressed so far as (domain, slot, value)."},
      {"output-format",
       "Answer with a single JSON object mapping each domain to an object of slot-value pairs, "
       "for example {\"hotel\": {\"area\": \"north\"}}. Output nothing but the JSON object."},
      {"ontology", "Only use the following domains and slots:"},
      {"categorical-slots",
       "The following slots are categorical. Choose their values only from the listed options:"},
      {"time-slots", "The following slots hold times. Write them in 24-hour format (hh:mm):"},
      {"number-slots", "The following slots hold counts. Write them as non-negative integers:"},
      {"examples", "Examples:"},
      {"dialogue", "Dialogue:"},
  };
  t.rg = {
      {"task",
       "You are the system side of a task-oriented dialogue. Write the next system response to "
       "the dialogue below, using the database results."},
      {"ontology", "The dialogue concerns the following domains and slots:"},
      {"delexicalisation",
       "Do not write concrete slot values. Substitute slot values with these placeholders:"},
      {"language", "Write the response in {language}."},
      {"examples", "Examples:"},
      {"database", "Database results:"},
      {"dialogue", "Dialogue:"},
  };
  t.language_names = {{"eng", "English"}, {"ara", "Arabic"}, {"fra", "French"}, {"tur", "Turkish"}};
  return t;
}

PromptTemplates PromptTemplates::from_json(const nlohmann::json& j) {
  PromptTemplates t = defaults();
  auto merge = [&](const char* key, std::map<std::string, std::string>& into) {
    if (!j.contains(key)) return;
    for (const auto& [name, value] : j.at(key).items()) {
      if (!value.is_string()) throw ParseError(std::string(key) + "/" + name, "expected a string");
      into[name] = value.get<std::string>();
    }
  };
  merge("dst", t.dst);
  merge("rg", t.rg);
  merge("languages", t.language_names);
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

std::span<const Utterance> truncate_history(std::span<const Utterance> history, size_t window) {
  if (window == 0) window = 1;
  if (history.size() <= window) return history;
  return history.subspan(history.size() - window);
}

std::string build_dst_prompt(const Ontology& ontology, const std::vector<IclExample>& examples,
                             std::span<const Utterance> history, const PromptConfig& config,
                             const PromptTemplates& templates) {
  if (history.empty()) throw ValidationError("DST prompt needs a non-empty history");
  std::ostringstream out;
  const auto& t = templates.dst;
  append_section(out, "task", lookup(t, "task"));
  append_section(out, "output-format", lookup(t, "output-format"));
  append_section(out, "ontology", lookup(t, "ontology") + "\n" + ontology_listing(ontology));
  append_section(out, "categorical-slots",
                 lookup(t, "categorical-slots") + "\n" +
                     slots_of_kind(ontology, SlotKind::kCategorical, true));
  append_section(out, "time-slots",
                 lookup(t, "time-slots") + "\n" + slots_of_kind(ontology, SlotKind::kTime, false));
  append_section(out, "number-slots", lookup(t, "number-slots") + "\n" +
                                          slots_of_kind(ontology, SlotKind::kNumber, false));
  if (!examples.empty()) {
    std::ostringstream ex;
    ex << lookup(t, "examples") << "\n";
    for (size_t i = 0; i < examples.size(); ++i) {
      ex << "Example " << (i + 1) << ":\n";
      render_history(ex, truncate_history(examples[i].history, config.context_window));
      ex << "state: " << state_to_json(examples[i].gold_state).dump() << "\n";
    }
    append_section(out, "examples", ex.str());
  }
  std::ostringstream dialogue;
  dialogue << lookup(t, "dialogue") << "\n";
  render_history(dialogue, truncate_history(history, config.context_window));
  append_section(out, "dialogue", dialogue.str());
  return out.str();
}

std::string build_rg_prompt(const Ontology& ontology, const std::vector<IclExample>& examples,
                            std::span<const Utterance> history, const std::string& db_summary,
                            const std::set<std::string>& placeholders, const PromptConfig& config,
                            const PromptTemplates& templates) {
  if (history.empty()) throw ValidationError("RG prompt needs a non-empty history");
  std::ostringstream out;
  const auto& t = templates.rg;
  append_section(out, "task", lookup(t, "task"));
  append_section(out, "ontology", lookup(t, "ontology") + "\n" + ontology_listing(ontology));
  std::ostringstream delex;
  delex << lookup(t, "delexicalisation") << "\n";
  for (const auto& p : placeholders) delex << "- " << p << "\n";
  append_section(out, "delexicalisation", delex.str());
  std::string language = lookup(t, "language");
  const std::string name = language_name(templates, config.target_language);
  for (size_t pos = language.find("{language}"); pos != std::string::npos;
       pos = language.find("{language}", pos + name.size())) {
    language.replace(pos, 10, name);
  }
  append_section(out, "language", language);
  if (!examples.empty()) {
    std::ostringstream ex;
    ex << lookup(t, "examples") << "\n";
    for (size_t i = 0; i < examples.size(); ++i) {
      ex << "Example " << (i + 1) << ":\n";
      render_history(ex, truncate_history(examples[i].history, config.context_window));
      ex << "response: " << examples[i].gold_delex << "\n";
    }
    append_section(out, "examples", ex.str());
  }
  append_section(out, "database", lookup(t, "database") + "\n" + db_summary);
  std::ostringstream dialogue;
  dialogue << lookup(t, "dialogue") << "\n";
  render_history(dialogue, truncate_history(history, config.context_window));
  append_section(out, "dialogue", dialogue.str());
  return out.str();
}

}  // namespace dialight::prompt
