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
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dialight/codec/state_codec.hpp"
#include "dialight/core/types.hpp"
#include "dialight/db/database.hpp"
#include "dialight/gateway/gateway.hpp"
#include "dialight/prompt/prompt_builder.hpp"
#include "dialight/realization/realization.hpp"

#include "json.hpp"

namespace httplib {
class Server;
}

namespace dialight::orchestrator {

// Everything a pipeline needs besides the model backends. Shared, read-only.
struct PipelineResources {
  Ontology ontology;
  db::Database database;
  db::MatchOptions match;
  realization::SummaryTemplates summaries;
  prompt::PromptTemplates prompts = prompt::PromptTemplates::defaults();
  std::set<std::string> placeholders;
  // Pool for in-context examples of prompted backends.
  std::optional<Corpus> icl_pool;
};

struct SystemConfig {
  std::string dst_backend;
  std::string rg_backend;
  std::string language = "eng";
  std::optional<size_t> threshold;  // overrides resources.match.threshold
  prompt::PromptConfig prompt;
  // Dialogue id sent to model servers; defaults to the session id. Replay
  // backends key their scripts on it.
  std::optional<std::string> dialogue_tag;
};

nlohmann::json to_json(const SystemConfig& c);
SystemConfig system_config_from_json(const nlohmann::json& j);

struct TurnTrace {
  size_t turn_index = 0;
  std::string user_text;
  std::string raw_dst;
  codec::ParseOutcome parse;
  bool carried_forward = false;
  DialogueState state;  // accumulated state after this turn
  std::vector<std::string> violations;
  std::map<std::string, size_t> counts;
  std::string db_summary;
  std::string raw_rg;
  DelexResponse delex;
  std::string lexicalized;
  std::optional<std::string> active_domain;
  bool active_domain_changed = false;
  double dst_ms = 0, rg_ms = 0, total_ms = 0;
  std::string dst_instance, rg_instance;
};

nlohmann::json to_json(const TurnTrace& t);

class Orchestrator {
 public:
  Orchestrator(std::shared_ptr<const PipelineResources> resources, gateway::ModelGateway& gateway);

  // Throws NotFoundError when a referenced backend is not registered and
  // ValidationError when a backend serves the wrong task.
  std::string create_session(const SystemConfig& config);

  // Runs DST -> parse -> DB -> summary -> RG -> lexicalize for one user turn.
  // A failing turn leaves the session exactly as it was.
  TurnTrace process_user_turn(const std::string& session_id, const std::string& user_text);

  nlohmann::json session_json(const std::string& session_id) const;
  std::vector<TurnTrace> traces(const std::string& session_id) const;
  DialogueState state(const std::string& session_id) const;
  std::vector<Utterance> history(const std::string& session_id) const;
  bool has_session(const std::string& session_id) const;

  const PipelineResources& resources() const { return *resources_; }

 private:
  struct Session {
    std::string id;
    SystemConfig config;
    gateway::Mode dst_mode = gateway::Mode::kStructured;
    gateway::Mode rg_mode = gateway::Mode::kStructured;
    std::vector<prompt::IclExample> examples;
    mutable std::mutex mu;
    std::vector<Utterance> history;
    DialogueState state;
    std::map<std::string, int> last_changed;
    std::optional<std::string> active_domain;
    std::vector<TurnTrace> traces;
  };

  std::shared_ptr<Session> find(const std::string& id) const;

  std::shared_ptr<const PipelineResources> resources_;
  gateway::ModelGateway& gateway_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// POST /v1/sessions, POST /v1/sessions/{id}/turns, GET /v1/sessions/{id}.
void mount_session_routes(httplib::Server& server, Orchestrator& orchestrator);

}  // namespace dialight::orchestrator
