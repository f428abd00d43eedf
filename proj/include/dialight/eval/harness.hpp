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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dialight/core/error.hpp"
#include "dialight/core/types.hpp"
#include "dialight/db/database.hpp"
#include "dialight/eval/metrics.hpp"
#include "dialight/gateway/replay.hpp"

#include "json.hpp"

namespace dialight::eval {

struct InformSuccessConfig {
  // Domains whose goal asks the system to offer an entity.
  std::set<std::string> venue_domains = {"attraction", "hotel", "restaurant", "train"};
  // Placeholder that counts as offering an entity; "[value_name]" otherwise.
  std::map<std::string, std::set<std::string>> venue_placeholders = {
      {"train", {"[value_id]", "[value_trainid]"}}};
  // Goal requestables that are scored, and the placeholders that satisfy them.
  std::map<std::string, std::set<std::string>> requestable_placeholders = {
      {"address", {"[value_address]"}},
      {"phone", {"[value_phone]"}},
      {"postcode", {"[value_postcode]"}},
      {"reference", {"[value_reference]"}},
      {"id", {"[value_id]", "[value_trainid]"}},
      {"trainid", {"[value_id]", "[value_trainid]"}},
  };
  // A goal with booking constraints also requests a reference number.
  bool booking_requests_reference = true;

  std::set<std::string> venue_tokens(const std::string& domain) const;
};

struct DialogueOutcome {
  std::string dialogue_id;
  bool evaluated = false;
  bool inform = false;
  bool success = false;
  std::map<std::string, bool> domain_inform;
  std::map<std::string, bool> domain_success;
};

// `states` are the accumulated states used for the DB check, `responses` the
// delexicalized system responses, both one per turn. Response attribution
// follows the active-domain rule applied to the dialogue's gold states.
DialogueOutcome inform_success_dialogue(const Dialogue& dialogue,
                                        const std::vector<DialogueState>& states,
                                        const std::vector<std::string>& responses,
                                        const db::Database& database, const Ontology& ontology,
                                        const db::MatchOptions& match,
                                        const InformSuccessConfig& config = {});

struct InformSuccessResult {
  double inform_rate = 0;
  double success_rate = 0;
  size_t evaluated = 0;
  size_t skipped = 0;
  std::vector<std::string> warnings;
  std::vector<DialogueOutcome> dialogues;
};

InformSuccessResult aggregate(const std::vector<DialogueOutcome>& outcomes);

// Inform/Success of the gold annotations themselves.
InformSuccessResult inform_success_gold(const Corpus& corpus, const db::Database& database,
                                        const Ontology& ontology, const db::MatchOptions& match,
                                        const InformSuccessConfig& config = {});

enum class EvalMode { kE2E, kOracleDst, kOracleRg, kGoldGold };

const char* to_string(EvalMode m);
// Accepts "e2e", "oracle-dst", "oracle_dst", "oracle-rg", "oracle_rg",
// "gold-gold", "gold_gold".
EvalMode eval_mode_from_string(const std::string& s);

enum class DstFormat { kAuto, kLinearized, kJson };
DstFormat dst_format_from_string(const std::string& s);

struct EvalConfig {
  db::MatchOptions match;
  InformSuccessConfig inform;
  MeteorParams meteor;
  DstFormat dst_format = DstFormat::kAuto;
  size_t workers = 1;
};

struct EvalReport {
  std::string language;
  std::string mode;
  double jga = 0;
  double slot_precision = 0;
  double slot_recall = 0;
  double slot_f1 = 0;
  double bleu = 0;
  double rouge_l = 0;  // 0-100
  double meteor = 0;   // 0-100
  double inform_rate = 0;
  double success_rate = 0;
  size_t dialogues = 0;
  size_t evaluated_dialogues = 0;
  size_t skipped_dialogues = 0;
  size_t turns = 0;
  size_t predicted_states = 0;
  size_t non_compliant_states = 0;
  double format_non_adherence = 0;  // % of predicted states
  size_t gold_placeholders = 0;
  size_t recalled_placeholders = 0;
  double placeholder_recall = 0;  // % of gold placeholder occurrences
  std::vector<std::string> warnings;
  std::vector<DialogueOutcome> outcomes;
};

nlohmann::json to_json(const EvalReport& r, bool include_dialogues = false);
// Plain-text table with one row per report.
std::string render_table(const std::vector<EvalReport>& reports);

class CoverageError : public Error {
 public:
  explicit CoverageError(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// Keys the prediction source must provide for `mode`.
std::vector<std::string> required_keys(const Corpus& corpus, EvalMode mode);

// Throws CoverageError listing every missing key. `predictions` may be null
// only in gold_gold mode, which never reads it.
EvalReport evaluate_run(const Corpus& corpus, const Ontology& ontology, const db::Database& database,
                        const gateway::ReplayScript* predictions, EvalMode mode,
                        const EvalConfig& config = {});

}  // namespace dialight::eval
