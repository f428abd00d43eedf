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

#include "dialight/orchestrator/orchestrator.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"

#include "httplib.h"

namespace dialight::orchestrator {

using nlohmann::json;

json to_json(const SystemConfig& c) {
  json j = {{"dst_backend", c.dst_backend},
            {"rg_backend", c.rg_backend},
            {"language", c.language},
            {"prompt",
             {{"n_icl_examples", c.prompt.n_icl_examples},
              {"rng_seed", c.prompt.rng_seed},
              {"target_language", c.prompt.target_language},
              {"context_window", c.prompt.context_window}}}};
  if (c.threshold) j["threshold"] = *c.threshold;
  if (c.dialogue_tag) j["dialogue_tag"] = *c.dialogue_tag;
  return j;
}

SystemConfig system_config_from_json(const json& j) {
  SystemConfig c;
  try {
    c.dst_backend = j.at("dst_backend").get<std::string>();
    c.rg_backend = j.at("rg_backend").get<std::string>();
    c.language = j.value("language", c.language);
    c.prompt.target_language = c.language;
    if (j.contains("threshold")) c.threshold = j.at("threshold").get<size_t>();
    if (j.contains("dialogue_tag")) c.dialogue_tag = j.at("dialogue_tag").get<std::string>();
    if (j.contains("prompt")) {
      const json& p = j.at("prompt");
      c.prompt.n_icl_examples = p.value("n_icl_examples", c.prompt.n_icl_examples);
      c.prompt.rng_seed = p.value("rng_seed", c.prompt.rng_seed);
      c.prompt.context_window = p.value("context_window", c.prompt.context_window);
    }
    // Flat spelling as in the deployment config.
    c.prompt.context_window = j.value("context_window", c.prompt.context_window);
    c.prompt.n_icl_examples = j.value("n_icl_examples", c.prompt.n_icl_examples);
  } catch (const json::exception& e) {
    throw ParseError("system config", e.what());
  }
  if (c.prompt.context_window == 0) throw ValidationError("context_window must be >= 1");
  return c;
}

json to_json(const TurnTrace& t) {
  json placeholders = json::array();
  for (const auto& p : t.delex.placeholders) {
    placeholders.push_back({{"token", p.token}, {"slot", p.slot}, {"offset", p.offset}});
  }
  json j = {{"turn", t.turn_index},
            {"user", t.user_text},
            {"raw_dst", t.raw_dst},
            {"parse",
             {{"state", state_to_json(t.parse.state)},
              {"compliant", t.parse.compliant},
              {"diagnostics", t.parse.diagnostics}}},
            {"carried_forward", t.carried_forward},
            {"state", state_to_json(t.state)},
            {"violations", t.violations},
            {"counts", t.counts},
            {"db_summary", t.db_summary},
            {"raw_rg", t.raw_rg},
            {"delex", {{"text", t.delex.text}, {"placeholders", placeholders}}},
            {"response", t.lexicalized},
            {"active_domain", t.active_domain ? json(*t.active_domain) : json(nullptr)},
            {"active_domain_changed", t.active_domain_changed},
            {"latency_ms", {{"dst", t.dst_ms}, {"rg", t.rg_ms}, {"total", t.total_ms}}},
            {"instances", {{"dst", t.dst_instance}, {"rg", t.rg_instance}}}};
  return j;
}

Orchestrator::Orchestrator(std::shared_ptr<const PipelineResources> resources,
                           gateway::ModelGateway& gateway)
    : resources_(std::move(resources)), gateway_(gateway) {}

namespace {

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream out;
  out << "s" << std::hex << rng();
  return out.str();
}

}  // namespace

std::string Orchestrator::create_session(const SystemConfig& config) {
  auto check = [&](const std::string& id, gateway::Task task) {
    const auto d = gateway_.backend(id);  // throws NotFoundError
    if (d.task != task) {
      throw ValidationError("backend '" + id + "' does not serve " + gateway::to_string(task));
    }
    return d.mode;
  };
  auto session = std::make_shared<Session>();
  session->config = config;
  session->config.prompt.target_language = config.language;
  session->dst_mode = check(config.dst_backend, gateway::Task::kDst);
  session->rg_mode = check(config.rg_backend, gateway::Task::kRg);
  if (config.prompt.context_window == 0) throw ValidationError("context_window must be >= 1");
  if (config.prompt.n_icl_examples > 0) {
    if (!resources_->icl_pool) {
      throw ValidationError("in-context examples requested but no example pool is loaded");
    }
    session->examples = prompt::select_icl_examples(*resources_->icl_pool,
                                                    config.prompt.n_icl_examples,
                                                    config.prompt.rng_seed);
  }
  resources_->summaries.get(config.language);  // fail early on a missing template

  std::unique_lock lock(mu_);
  do {
    session->id = random_session_id();
  } while (sessions_.count(session->id));
  sessions_[session->id] = session;
  return session->id;
}

std::shared_ptr<Orchestrator::Session> Orchestrator::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

bool Orchestrator::has_session(const std::string& id) const {
  std::shared_lock lock(mu_);
  return sessions_.count(id) > 0;
}

TurnTrace Orchestrator::process_user_turn(const std::string& session_id,
                                          const std::string& user_text) {
  auto session = find(session_id);
  if (text::trim(user_text).empty()) throw ValidationError("user text must not be empty");
  std::lock_guard lock(session->mu);
  const auto t_start = std::chrono::steady_clock::now();
  const PipelineResources& res = *resources_;
  const SystemConfig& config = session->config;

  TurnTrace trace;
  trace.turn_index = session->traces.size();
  trace.user_text = user_text;

  std::vector<Utterance> history = session->history;
  history.push_back({Speaker::kUser, user_text, config.language});
  const auto window = prompt::truncate_history(history, config.prompt.context_window);

  gateway::InferencePayload base;
  base.history.assign(window.begin(), window.end());
  base.language = config.language;
  base.dialogue_id = config.dialogue_tag.value_or(session->id);
  base.turn = trace.turn_index;

  // Dialogue state tracking.
  gateway::InferenceRequest dst{config.dst_backend, gateway::Task::kDst, session->id, base, ""};
  if (session->dst_mode == gateway::Mode::kPrompted) {
    dst.payload.prompt = prompt::build_dst_prompt(res.ontology, session->examples, history,
                                                  config.prompt, res.prompts);
  }
  const auto dst_response = gateway_.route(dst);
  trace.raw_dst = dst_response.output;
  trace.dst_ms = dst_response.latency_ms;
  trace.dst_instance = dst_response.instance_id;
  trace.parse = session->dst_mode == gateway::Mode::kPrompted
                    ? codec::parse_structured_state(trace.raw_dst, res.ontology)
                    : codec::parse_linearized_state(trace.raw_dst, res.ontology);

  DialogueState state = session->state;
  if (!trace.parse.compliant && trace.parse.state.empty()) {
    trace.carried_forward = true;
  } else {
    state.merge(trace.parse.state);
  }
  for (const auto& v : validate_state(state, res.ontology)) trace.violations.push_back(v.message);
  auto last_changed = session->last_changed;
  for (const auto& d : realization::changed_domains(session->state, state)) {
    last_changed[d] = static_cast<int>(trace.turn_index);
  }

  // Database lookup, one independent query per domain in the state.
  db::MatchOptions match = res.match;
  if (config.threshold) match.threshold = *config.threshold;
  std::map<std::string, std::vector<db::DbEntry>> entries;
  for (const auto& domain : state.domains()) {
    if (!res.database.has_domain(domain)) continue;
    auto found = db::query_domain(res.database, state, domain, res.ontology, match);
    trace.counts[domain] = found.size();
    entries[domain] = std::move(found);
  }
  trace.db_summary = realization::summarize_results(trace.counts, config.language, res.summaries);
  trace.active_domain = realization::resolve_active_domain(last_changed, trace.counts);
  trace.active_domain_changed = trace.active_domain != session->active_domain;

  // Response generation.
  gateway::InferenceRequest rg{config.rg_backend, gateway::Task::kRg, session->id, base, ""};
  rg.payload.db_summary = trace.db_summary;
  if (session->rg_mode == gateway::Mode::kPrompted) {
    rg.payload.prompt = prompt::build_rg_prompt(res.ontology, session->examples, history,
                                                trace.db_summary, res.placeholders, config.prompt,
                                                res.prompts);
  }
  const auto rg_response = gateway_.route(rg);
  trace.raw_rg = rg_response.output;
  trace.rg_ms = rg_response.latency_ms;
  trace.rg_instance = rg_response.instance_id;
  trace.delex = make_delex(trace.raw_rg);
  trace.lexicalized =
      realization::lexicalize(trace.delex, state, entries, trace.active_domain, match);
  trace.state = state;
  trace.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();

  // Commit.
  history.push_back({Speaker::kSystem, trace.lexicalized, config.language});
  session->history = std::move(history);
  session->state = std::move(state);
  session->last_changed = std::move(last_changed);
  session->active_domain = trace.active_domain;
  session->traces.push_back(trace);
  return trace;
}

json Orchestrator::session_json(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  json history = json::array();
  for (const auto& u : session->history) {
    history.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
  }
  json turns = json::array();
  for (const auto& t : session->traces) turns.push_back(to_json(t));
  return {{"id", session->id},
          {"config", to_json(session->config)},
          {"history", history},
          {"state", state_to_json(session->state)},
          {"turns", turns}};
}

std::vector<TurnTrace> Orchestrator::traces(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  return session->traces;
}

DialogueState Orchestrator::state(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  return session->state;
}

std::vector<Utterance> Orchestrator::history(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  return session->history;
}

void mount_session_routes(httplib::Server& server, Orchestrator& orchestrator) {
  auto guarded = [](httplib::Response& res, auto&& body) {
    auto fail = [&](int status, const std::string& message) {
      res.status = status;
      res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    try {
      body();
    } catch (const json::exception& e) {
      fail(400, e.what());
    } catch (const ParseError& e) {
      fail(400, e.what());
    } catch (const NotFoundError& e) {
      fail(404, e.what());
    } catch (const ValidationError& e) {
      fail(422, e.what());
    } catch (const TimeoutError& e) {
      fail(504, e.what());
    } catch (const UnavailableError& e) {
      fail(503, e.what());
    }
  };
  server.Post("/v1/sessions", [&orchestrator, guarded](const httplib::Request& req,
                                                       httplib::Response& res) {
    guarded(res, [&] {
      const auto config = system_config_from_json(json::parse(req.body));
      // Unknown backends are a client error here, not a missing resource.
      std::string id;
      try {
        id = orchestrator.create_session(config);
      } catch (const NotFoundError& e) {
        throw ValidationError(e.what());
      }
      res.status = 201;
      res.set_content(json{{"id", id}}.dump(), "application/json");
    });
  });
  server.Post(R"(/v1/sessions/([^/]+)/turns)", [&orchestrator, guarded](const httplib::Request& req,
                                                                         httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const auto trace =
          orchestrator.process_user_turn(req.matches[1], body.at("text").get<std::string>());
      res.set_content(to_json(trace).dump(), "application/json");
    });
  });
  server.Get(R"(/v1/sessions/([^/]+))", [&orchestrator, guarded](const httplib::Request& req,
                                                                  httplib::Response& res) {
    guarded(res, [&] {
      res.set_content(orchestrator.session_json(req.matches[1]).dump(), "application/json");
    });
  });
}

}  // namespace dialight::orchestrator
