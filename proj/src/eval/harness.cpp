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

#include "dialight/eval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

#include "dialight/codec/state_codec.hpp"
#include "dialight/core/placeholders.hpp"
#include "dialight/realization/realization.hpp"

namespace dialight::eval {

using nlohmann::json;

std::set<std::string> InformSuccessConfig::venue_tokens(const std::string& domain) const {
  auto it = venue_placeholders.find(domain);
  if (it != venue_placeholders.end()) return it->second;
  return {"[value_name]"};
}

namespace {

std::set<std::string> tokens_of(const std::string& response) {
  std::set<std::string> out;
  for (const auto& p : extract_placeholders(response)) out.insert(p.token);
  return out;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.count(x)) return true;
  }
  return false;
}

// Domains each response is attributed to.
std::vector<std::set<std::string>> attribute_responses(const Dialogue& dialogue,
                                                       const db::Database& database,
                                                       const Ontology& ontology,
                                                       const db::MatchOptions& match) {
  std::set<std::string> stateful;
  for (const auto& turn : dialogue.turns) {
    for (const auto& d : turn.gold_state.domains()) stateful.insert(d);
  }
  // Goal domains the state never mentions (police, hospital without
  // constraints) have no active-domain signal; every response counts.
  std::set<std::string> stateless;
  for (const auto& [d, g] : dialogue.goal.domains) {
    if (!stateful.count(d)) stateless.insert(d);
  }

  std::vector<std::set<std::string>> out;
  std::map<std::string, int> last_changed;
  DialogueState previous;
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const DialogueState& gold = dialogue.turns[t].gold_state;
    for (const auto& d : realization::changed_domains(previous, gold)) {
      last_changed[d] = static_cast<int>(t);
    }
    std::map<std::string, size_t> counts;
    for (const auto& d : gold.domains()) {
      if (database.has_domain(d)) counts[d] = db::query_domain(database, gold, d, ontology, match).size();
    }
    std::set<std::string> domains = stateless;
    if (auto active = realization::resolve_active_domain(last_changed, counts)) domains.insert(*active);
    out.push_back(std::move(domains));
    previous = gold;
  }
  return out;
}

}  // namespace

DialogueOutcome inform_success_dialogue(const Dialogue& dialogue,
                                        const std::vector<DialogueState>& states,
                                        const std::vector<std::string>& responses,
                                        const db::Database& database, const Ontology& ontology,
                                        const db::MatchOptions& match,
                                        const InformSuccessConfig& config) {
  DialogueOutcome out;
  out.dialogue_id = dialogue.id;
  if (!dialogue.has_goal) return out;
  if (states.size() != dialogue.turns.size() || responses.size() != dialogue.turns.size()) {
    throw ValidationError("dialogue '" + dialogue.id + "': expected " +
                          std::to_string(dialogue.turns.size()) + " states and responses");
  }
  out.evaluated = true;

  const auto attribution = attribute_responses(dialogue, database, ontology, match);
  std::vector<std::set<std::string>> tokens;
  tokens.reserve(responses.size());
  for (const auto& r : responses) tokens.push_back(tokens_of(r));

  bool inform = true;
  bool success = true;
  for (const auto& [domain, goal] : dialogue.goal.domains) {
    bool domain_inform = true;
    if (config.venue_domains.count(domain)) {
      domain_inform = false;
      const auto venue = config.venue_tokens(domain);
      for (size_t t = 0; t < responses.size() && !domain_inform; ++t) {
        if (!attribution[t].count(domain) || !intersects(tokens[t], venue)) continue;
        if (!database.has_domain(domain)) {
          domain_inform = true;
          break;
        }
        const auto& table = database.get(domain);
        const auto entries = db::query_domain(table, states[t], domain, ontology, match);
        domain_inform = !entries.empty() &&
                        std::all_of(entries.begin(), entries.end(), [&](const db::DbEntry& e) {
                          return db::entry_matches(e, goal.informable, table, ontology, match);
                        });
      }
    }

    std::set<std::string> required;
    for (const auto& r : goal.requestable) {
      if (config.requestable_placeholders.count(r)) required.insert(r);
    }
    if (config.booking_requests_reference && !goal.booking.empty()) required.insert("reference");
    bool domain_success = domain_inform;
    for (const auto& r : required) {
      if (!domain_success) break;
      const auto& wanted = config.requestable_placeholders.at(r);
      bool found = false;
      for (size_t t = 0; t < responses.size() && !found; ++t) {
        found = attribution[t].count(domain) && intersects(tokens[t], wanted);
      }
      domain_success = found;
    }
    out.domain_inform[domain] = domain_inform;
    out.domain_success[domain] = domain_success;
    inform = inform && domain_inform;
    success = success && domain_success;
  }
  out.inform = inform;
  out.success = inform && success;
  return out;
}

InformSuccessResult aggregate(const std::vector<DialogueOutcome>& outcomes) {
  InformSuccessResult r;
  size_t inform = 0, success = 0;
  for (const auto& o : outcomes) {
    if (!o.evaluated) {
      ++r.skipped;
      r.warnings.push_back("dialogue '" + o.dialogue_id + "' has no goal; skipped");
      continue;
    }
    ++r.evaluated;
    inform += o.inform ? 1 : 0;
    success += o.success ? 1 : 0;
  }
  if (r.evaluated) {
    r.inform_rate = 100.0 * inform / r.evaluated;
    r.success_rate = 100.0 * success / r.evaluated;
  }
  r.dialogues = outcomes;
  return r;
}

InformSuccessResult inform_success_gold(const Corpus& corpus, const db::Database& database,
                                        const Ontology& ontology, const db::MatchOptions& match,
                                        const InformSuccessConfig& config) {
  std::vector<DialogueOutcome> outcomes;
  for (const auto& [id, dialogue] : corpus.dialogues) {
    std::vector<DialogueState> states;
    std::vector<std::string> responses;
    for (const auto& turn : dialogue.turns) {
      states.push_back(turn.gold_state);
      responses.push_back(turn.gold_delex.text);
    }
    outcomes.push_back(
        inform_success_dialogue(dialogue, states, responses, database, ontology, match, config));
  }
  return aggregate(outcomes);
}

const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::kE2E: return "e2e";
    case EvalMode::kOracleDst: return "oracle-dst";
    case EvalMode::kOracleRg: return "oracle-rg";
    case EvalMode::kGoldGold: return "gold-gold";
  }
  return "?";
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "e2e") return EvalMode::kE2E;
  if (s == "oracle-dst" || s == "oracle_dst") return EvalMode::kOracleDst;
  if (s == "oracle-rg" || s == "oracle_rg") return EvalMode::kOracleRg;
  if (s == "gold-gold" || s == "gold_gold") return EvalMode::kGoldGold;
  throw ValidationError("unknown evaluation mode '" + s + "'");
}

DstFormat dst_format_from_string(const std::string& s) {
  if (s == "auto") return DstFormat::kAuto;
  if (s == "linearized") return DstFormat::kLinearized;
  if (s == "json") return DstFormat::kJson;
  throw ValidationError("unknown state format '" + s + "'");
}

CoverageError::CoverageError(std::vector<std::string> missing)
    : Error([&] {
        std::string msg = "predictions miss " + std::to_string(missing.size()) + " key(s):";
        const size_t shown = std::min<size_t>(missing.size(), 20);
        for (size_t i = 0; i < shown; ++i) msg += " " + missing[i];
        if (shown < missing.size()) msg += " ...";
        return msg;
      }()),
      missing_(std::move(missing)) {}

namespace {

bool uses_predicted_states(EvalMode m) { return m == EvalMode::kE2E || m == EvalMode::kOracleRg; }
bool uses_predicted_responses(EvalMode m) {
  return m == EvalMode::kE2E || m == EvalMode::kOracleDst;
}

struct Partial {
  size_t turns = 0;
  size_t jga_hits = 0;
  SlotCounts slots;
  BleuStats bleu;
  double rouge_sum = 0;
  double meteor_sum = 0;
  size_t predicted_states = 0;
  size_t non_compliant = 0;
  size_t gold_placeholders = 0;
  size_t recalled_placeholders = 0;
  DialogueOutcome outcome;
};

size_t multiset_overlap(const std::vector<Placeholder>& gold, const std::vector<Placeholder>& pred) {
  std::map<std::string, size_t> counts;
  for (const auto& p : pred) ++counts[p.token];
  size_t hits = 0;
  for (const auto& p : gold) {
    auto it = counts.find(p.token);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

codec::ParseOutcome parse_prediction(const std::string& raw, const Ontology& ontology, DstFormat f) {
  switch (f) {
    case DstFormat::kLinearized: return codec::parse_linearized_state(raw, ontology);
    case DstFormat::kJson: return codec::parse_structured_state(raw, ontology);
    case DstFormat::kAuto: break;
  }
  return codec::parse_any_state(raw, ontology);
}

Partial evaluate_dialogue(const Dialogue& dialogue, const Ontology& ontology,
                          const db::Database& database, const gateway::ReplayScript* predictions,
                          EvalMode mode, const EvalConfig& config) {
  Partial p;
  std::vector<DialogueState> accumulated_states;
  std::vector<std::string> responses;
  DialogueState accumulated;
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const Turn& turn = dialogue.turns[t];
    DialogueState per_turn = turn.gold_state;
    if (uses_predicted_states(mode)) {
      const std::string* raw = predictions->find(dialogue.id, t, gateway::Task::kDst);
      auto parsed = parse_prediction(*raw, ontology, config.dst_format);
      ++p.predicted_states;
      p.non_compliant += parsed.compliant ? 0 : 1;
      per_turn = parsed.state;
      if (!(parsed.state.empty() && !parsed.compliant)) accumulated.merge(parsed.state);
    } else {
      accumulated = turn.gold_state;
    }
    accumulated_states.push_back(accumulated);

    std::string response = turn.gold_delex.text;
    if (uses_predicted_responses(mode)) {
      response = *predictions->find(dialogue.id, t, gateway::Task::kRg);
    }
    responses.push_back(response);

    ++p.turns;
    p.jga_hits += states_match(per_turn, turn.gold_state) ? 1 : 0;
    const auto c = slot_counts(per_turn, turn.gold_state);
    p.slots.true_positive += c.true_positive;
    p.slots.predicted += c.predicted;
    p.slots.gold += c.gold;

    const auto hyp = tokenize(response);
    const auto ref = tokenize(turn.gold_delex.text);
    p.bleu.add(hyp, {ref});
    p.rouge_sum += rouge_l_tokens(hyp, ref);
    p.meteor_sum += meteor_tokens(hyp, ref, config.meteor);

    const auto pred_placeholders = extract_placeholders(response);
    p.gold_placeholders += turn.gold_delex.placeholders.size();
    p.recalled_placeholders += multiset_overlap(turn.gold_delex.placeholders, pred_placeholders);
  }
  p.outcome = inform_success_dialogue(dialogue, accumulated_states, responses, database, ontology,
                                      config.match, config.inform);
  return p;
}

}  // namespace

std::vector<std::string> required_keys(const Corpus& corpus, EvalMode mode) {
  std::vector<std::string> keys;
  for (const auto& [id, dialogue] : corpus.dialogues) {
    for (size_t t = 0; t < dialogue.turns.size(); ++t) {
      if (uses_predicted_states(mode)) keys.push_back(gateway::ReplayScript::key(id, t, gateway::Task::kDst));
      if (uses_predicted_responses(mode)) keys.push_back(gateway::ReplayScript::key(id, t, gateway::Task::kRg));
    }
  }
  return keys;
}

EvalReport evaluate_run(const Corpus& corpus, const Ontology& ontology, const db::Database& database,
                        const gateway::ReplayScript* predictions, EvalMode mode,
                        const EvalConfig& config) {
  if (mode != EvalMode::kGoldGold) {
    std::vector<std::string> missing;
    for (const auto& [id, dialogue] : corpus.dialogues) {
      for (size_t t = 0; t < dialogue.turns.size(); ++t) {
        for (auto task : {gateway::Task::kDst, gateway::Task::kRg}) {
          const bool needed = task == gateway::Task::kDst ? uses_predicted_states(mode)
                                                          : uses_predicted_responses(mode);
          if (needed && (!predictions || !predictions->find(id, t, task))) {
            missing.push_back(gateway::ReplayScript::key(id, t, task));
          }
        }
      }
    }
    if (!missing.empty()) throw CoverageError(std::move(missing));
  }

  std::vector<const Dialogue*> dialogues;
  for (const auto& [id, d] : corpus.dialogues) dialogues.push_back(&d);
  std::vector<Partial> partials(dialogues.size());
  const size_t workers = std::max<size_t>(1, std::min(config.workers, dialogues.size()));
  if (workers == 1) {
    for (size_t i = 0; i < dialogues.size(); ++i) {
      partials[i] = evaluate_dialogue(*dialogues[i], ontology, database, predictions, mode, config);
    }
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (size_t i = w; i < dialogues.size(); i += workers) {
            partials[i] = evaluate_dialogue(*dialogues[i], ontology, database, predictions, mode, config);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Reduce in dialogue order so any worker count gives the same numbers.
  EvalReport r;
  r.language = corpus.language;
  r.mode = to_string(mode);
  r.dialogues = dialogues.size();
  SlotCounts slots;
  BleuStats bleu;
  double rouge_sum = 0, meteor_sum = 0;
  size_t jga_hits = 0;
  std::vector<DialogueOutcome> outcomes;
  for (const auto& p : partials) {
    r.turns += p.turns;
    jga_hits += p.jga_hits;
    slots.true_positive += p.slots.true_positive;
    slots.predicted += p.slots.predicted;
    slots.gold += p.slots.gold;
    bleu += p.bleu;
    rouge_sum += p.rouge_sum;
    meteor_sum += p.meteor_sum;
    r.predicted_states += p.predicted_states;
    r.non_compliant_states += p.non_compliant;
    r.gold_placeholders += p.gold_placeholders;
    r.recalled_placeholders += p.recalled_placeholders;
    outcomes.push_back(p.outcome);
  }
  if (r.turns) {
    r.jga = 100.0 * jga_hits / r.turns;
    r.rouge_l = 100.0 * rouge_sum / r.turns;
    r.meteor = 100.0 * meteor_sum / r.turns;
    r.bleu = bleu.score();
  }
  const auto prf = slot_prf_from_counts(slots);
  r.slot_precision = prf.precision;
  r.slot_recall = prf.recall;
  r.slot_f1 = prf.f1;
  r.format_non_adherence =
      r.predicted_states ? 100.0 * r.non_compliant_states / r.predicted_states : 0.0;
  r.placeholder_recall =
      r.gold_placeholders ? 100.0 * r.recalled_placeholders / r.gold_placeholders : 100.0;

  auto is = aggregate(outcomes);
  r.inform_rate = is.inform_rate;
  r.success_rate = is.success_rate;
  r.evaluated_dialogues = is.evaluated;
  r.skipped_dialogues = is.skipped;
  r.warnings = std::move(is.warnings);
  r.outcomes = std::move(is.dialogues);
  return r;
}

json to_json(const EvalReport& r, bool include_dialogues) {
  json j = {
      {"language", r.language},
      {"mode", r.mode},
      {"jga", r.jga},
      {"slot_precision", r.slot_precision},
      {"slot_recall", r.slot_recall},
      {"slot_f1", r.slot_f1},
      {"bleu", r.bleu},
      {"rouge_l", r.rouge_l},
      {"meteor", r.meteor},
      {"inform_rate", r.inform_rate},
      {"success_rate", r.success_rate},
      {"counts",
       {{"dialogues", r.dialogues},
        {"evaluated_dialogues", r.evaluated_dialogues},
        {"skipped_dialogues", r.skipped_dialogues},
        {"turns", r.turns},
        {"predicted_states", r.predicted_states},
        {"non_compliant_states", r.non_compliant_states},
        {"gold_placeholders", r.gold_placeholders},
        {"recalled_placeholders", r.recalled_placeholders}}},
      {"format_non_adherence", r.format_non_adherence},
      {"placeholder_recall", r.placeholder_recall},
      {"warnings", r.warnings},
  };
  if (include_dialogues) {
    json list = json::array();
    for (const auto& o : r.outcomes) {
      list.push_back({{"id", o.dialogue_id},
                      {"evaluated", o.evaluated},
                      {"inform", o.inform},
                      {"success", o.success},
                      {"domain_inform", o.domain_inform},
                      {"domain_success", o.domain_success}});
    }
    j["dialogues"] = list;
  }
  return j;
}

std::string render_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-10s %6s %7s %7s %7s %7s %7s %6s %7s %7s\n", "Lang", "Mode",
                "JGA", "SlotF1", "SlotP", "SlotR", "Inform", "Success", "BLEU", "ROUGE-L", "METEOR");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line,
                  "%-6s %-10s %6.1f %7.1f %7.1f %7.1f %7.1f %7.1f %6.1f %7.1f %7.1f\n",
                  r.language.c_str(), r.mode.c_str(), r.jga, r.slot_f1, r.slot_precision,
                  r.slot_recall, r.inform_rate, r.success_rate, r.bleu, r.rouge_l, r.meteor);
    out << line;
  }
  return out.str();
}

}  // namespace dialight::eval
