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

#include <random>

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"
#include "dialight/realization/realization.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dialight;
using namespace dialight::realization;

namespace {

size_t count_occurrences(const std::string& haystack, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("summary examples") {
  const SummaryTemplates t;
  CHECK(summarize_results({{"hotel", 0}, {"attraction", 1}}, "eng", t) ==
        "attraction has one result found; hotel has no result found");
  CHECK(summarize_results({}, "eng", t) == "");
  CHECK(summarize_results({{"restaurant", 5}}, "eng", t) == "restaurant has 5 results found");
  CHECK_THROWS_AS(summarize_results({{"hotel", 1}}, "fra", t), NotFoundError);
}

TEST_CASE("summary templates from config") {
  auto t = SummaryTemplates::from_json(nlohmann::json::parse(R"({
    "summary.fra": {"clause": "{domain} : {count}", "zero": "aucun résultat", "one": "un résultat",
                    "many": "{n} résultats", "separator": " ; "},
    "summary.tur": "{domain} için {count}"
  })"));
  CHECK(summarize_results({{"hotel", 0}, {"restaurant", 3}}, "fra", t) ==
        "hotel : aucun résultat ; restaurant : 3 résultats");
  CHECK(summarize_results({{"hotel", 1}}, "tur", t) == "hotel için one result found");
  CHECK(t.has("eng"));
}

TEST_CASE("summaries are total and deterministic") {
  std::mt19937 rng(3);
  const SummaryTemplates t;
  const std::vector<std::string> domains = {"attraction", "hotel", "restaurant", "taxi", "train"};
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, size_t> counts;
    for (const auto& d : domains) {
      if (rng() % 2) counts[d] = rng() % 4;
    }
    const std::string a = summarize_results(counts, "eng", t);
    CHECK(a == summarize_results(counts, "eng", t));
    CHECK(count_occurrences(a, " has ") == counts.size());
    CHECK(count_occurrences(a, "; ") == (counts.empty() ? 0 : counts.size() - 1));
  }
}

TEST_CASE("lexicalize from the first entry of the active domain") {
  const auto delex = make_delex("[value_name] is an [value_price] [value_food] restaurant on the [value_area] .");
  std::map<std::string, std::vector<db::DbEntry>> entries = {
      {"restaurant",
       {{"restaurant", {{"name", "golden wok"}, {"price", "cheap"}, {"food", "chinese"}, {"area", "north"}}},
        {"restaurant", {{"name", "curry garden"}, {"price", "expensive"}, {"food", "indian"}, {"area", "centre"}}}}}};
  CHECK(lexicalize(delex, {}, entries, std::string("restaurant")) ==
        "golden wok is an cheap chinese restaurant on the north .");
}

TEST_CASE("lexicalize falls back to the state, then to the marker") {
  DialogueState s{{"taxi", "departure", "saint johns college"}};
  CHECK(lexicalize(make_delex("from [value_departure] ."), s, {}, std::string("taxi")) ==
        "from saint johns college .");
  CHECK(lexicalize(make_delex("no placeholders here"), s, {}, std::string("taxi")) == "no placeholders here");

  auto r = lexicalize_detailed(make_delex("[value_departure] to [value_destination]"), s, {}, std::string("taxi"));
  CHECK(r.text == "saint johns college to [unknown]");
  CHECK(r.unresolved == 1);

  DialogueState booked{{"hotel", "bookpeople", "2"}};
  CHECK(lexicalize(make_delex("for [value_people] people"), booked, {}, std::string("hotel")) ==
        "for 2 people");

  // without an active domain nothing resolves
  CHECK(lexicalize(make_delex("[value_departure]"), s, {}, std::nullopt) == "[unknown]");
}

TEST_CASE("lexicalize uses the alias map") {
  db::MatchOptions options;
  options.aliases["train"]["id"] = "trainid";
  std::map<std::string, std::vector<db::DbEntry>> entries = {{"train", {{"train", {{"trainid", "TR1234"}}}}}};
  CHECK(lexicalize(make_delex("[value_id]"), {}, entries, std::string("train"), options) == "TR1234");
}

TEST_CASE("unresolved count equals the number of markers") {
  std::mt19937 rng(8);
  const std::vector<std::string> slots = {"name", "area", "phone", "food", "departure", "people"};
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const int n = rng() % 6;
    for (int k = 0; k < n; ++k) text += "w" + std::to_string(k) + " [value_" + slots[rng() % slots.size()] + "] ";
    db::DbEntry entry{"restaurant", {}};
    DialogueState state;
    for (const auto& s : slots) {
      if (rng() % 3 == 0) entry.attributes[s] = "e-" + s;
      if (rng() % 3 == 0) state.set("restaurant", s, "s-" + s);
    }
    std::map<std::string, std::vector<db::DbEntry>> entries;
    if (rng() % 2) entries["restaurant"] = {entry};
    auto r = lexicalize_detailed(make_delex(text), state, entries, std::string("restaurant"));
    CHECK(r.unresolved == count_occurrences(r.text, "[unknown]"));
    if (r.unresolved == 0) CHECK(extract_placeholders(r.text).empty());
  }
}

TEST_CASE("active domain resolution") {
  CHECK_FALSE(resolve_active_domain({}, {}).has_value());
  CHECK(resolve_active_domain({{"hotel", 1}, {"taxi", 2}}, {}) == "taxi");
  CHECK(resolve_active_domain({{"hotel", 2}, {"taxi", 2}}, {{"taxi", 3}, {"hotel", 0}}) == "taxi");
  CHECK(resolve_active_domain({{"hotel", 2}, {"taxi", 2}}, {}) == "hotel");
}

TEST_CASE("changed domains") {
  DialogueState a{{"hotel", "area", "north"}, {"taxi", "leaveat", "08:15"}};
  DialogueState b{{"hotel", "area", "centre"}, {"taxi", "leaveat", "08:15"}, {"train", "day", "friday"}};
  CHECK(changed_domains(a, b) == std::set<std::string>{"hotel", "train"});
  CHECK(changed_domains(b, a) == std::set<std::string>{"hotel", "train"});
  CHECK(changed_domains(a, a).empty());
}

TEST_CASE("placeholder inventory is the union over gold responses") {
  auto d = load_dataset(testing::data("gold_corpus.json"), testing::data("ontology.json"));
  auto inv = placeholder_inventory(d.corpus);
  CHECK(inv.count("[value_name]") == 1);
  CHECK(inv.count("[value_phone]") == 1);
  CHECK(inv.count("[value_reference]") == 1);
  for (const auto& p : inv) CHECK(p.rfind("[value_", 0) == 0);
}
