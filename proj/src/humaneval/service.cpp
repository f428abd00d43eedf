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

#include "dialight/humaneval/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>

#include "dialight/core/error.hpp"
#include "dialight/orchestrator/orchestrator.hpp"

#include "httplib.h"

namespace dialight::humaneval {

using nlohmann::json;

namespace {

const char* level_name(QuestionLevel l) { return l == QuestionLevel::kUtterance ? "utterance" : "dialogue"; }

const char* kind_name(QuestionKind k) {
  switch (k) {
    case QuestionKind::kLikert5: return "likert5";
    case QuestionKind::kBinary: return "binary";
    case QuestionKind::kFreetext: return "freetext";
  }
  return "?";
}

QuestionLevel level_from_string(const std::string& s) {
  if (s == "utterance") return QuestionLevel::kUtterance;
  if (s == "dialogue") return QuestionLevel::kDialogue;
  throw ValidationError("unknown question level '" + s + "'");
}

QuestionKind kind_from_string(const std::string& s) {
  if (s == "likert5") return QuestionKind::kLikert5;
  if (s == "binary") return QuestionKind::kBinary;
  if (s == "freetext") return QuestionKind::kFreetext;
  throw ValidationError("unknown question kind '" + s + "'");
}

}  // namespace

QuestionnaireConfig QuestionnaireConfig::defaults() {
  QuestionnaireConfig c;
  const std::vector<std::pair<std::string, std::string>> binary = {
      {"coherent", "The system's responses were coherent."},
      {"consistent", "The system did not contradict itself."},
      {"understands_user", "The system understood what I wanted."},
      {"informative", "The system gave me the information I needed."},
      {"diverse", "The system's responses were varied."},
      {"likeable", "The system had a likeable personality."},
  };
  for (const auto& [id, text] : binary) {
    c.questions.push_back({id, QuestionLevel::kDialogue, QuestionKind::kBinary, {{"eng", text}}});
  }
  c.questions.push_back({"overall", QuestionLevel::kDialogue, QuestionKind::kLikert5,
                         {{"eng", "Overall, how would you rate this dialogue? (1-5)"}}});
  c.questions.push_back({"quality", QuestionLevel::kUtterance, QuestionKind::kLikert5,
                         {{"eng", "How good is this response? (1-5)"}}});
  return c;
}

QuestionnaireConfig QuestionnaireConfig::from_json(const json& j) {
  QuestionnaireConfig c;
  try {
    for (const auto& q : j.at("questions")) {
      Question out;
      out.id = q.at("id").get<std::string>();
      out.level = level_from_string(q.at("level").get<std::string>());
      out.kind = kind_from_string(q.at("kind").get<std::string>());
      const json& prompt = q.at("prompt");
      if (prompt.is_string()) {
        out.prompt["eng"] = prompt.get<std::string>();
      } else {
        out.prompt = prompt.get<std::map<std::string, std::string>>();
      }
      c.questions.push_back(std::move(out));
    }
  } catch (const json::exception& e) {
    throw ParseError("questionnaire", e.what());
  }
  std::set<std::string> ids;
  bool dialogue_level = false;
  for (const auto& q : c.questions) {
    if (q.id.empty()) throw ValidationError("question id must not be empty");
    if (!ids.insert(q.id).second) throw ValidationError("duplicate question id '" + q.id + "'");
    dialogue_level = dialogue_level || q.level == QuestionLevel::kDialogue;
  }
  if (!dialogue_level) throw ValidationError("questionnaire needs a dialogue-level question");
  return c;
}

json QuestionnaireConfig::to_json() const {
  json list = json::array();
  for (const auto& q : questions) {
    list.push_back({{"id", q.id},
                    {"level", level_name(q.level)},
                    {"kind", kind_name(q.kind)},
                    {"prompt", q.prompt}});
  }
  return {{"questions", list}};
}

const Question* QuestionnaireConfig::find(const std::string& id) const {
  for (const auto& q : questions) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

InProcessBackend::InProcessBackend(orchestrator::Orchestrator& orchestrator,
                                   std::map<std::string, json> systems)
    : orchestrator_(orchestrator), systems_(std::move(systems)) {}

std::string InProcessBackend::create_session(const std::string& system_label) {
  auto it = systems_.find(system_label);
  if (it == systems_.end()) throw NotFoundError("unknown system '" + system_label + "'");
  return orchestrator_.create_session(orchestrator::system_config_from_json(it->second));
}

json InProcessBackend::send_turn(const std::string& backend_session, const std::string& text) {
  const auto trace = orchestrator_.process_user_turn(backend_session, text);
  return {{"response", trace.lexicalized}, {"trace", orchestrator::to_json(trace)}};
}

HttpBackend::HttpBackend(std::string base_url, std::map<std::string, json> systems,
                         int timeout_seconds)
    : base_url_(std::move(base_url)), systems_(std::move(systems)), timeout_seconds_(timeout_seconds) {}

namespace {

json checked(const httplib::Result& res, const std::string& what) {
  if (!res) throw UnavailableError(what + ": " + httplib::to_string(res.error()));
  std::string message = res->body;
  json body;
  try {
    body = json::parse(res->body);
    if (body.is_object() && body.contains("error")) message = body["error"].get<std::string>();
  } catch (const json::exception&) {
    if (res->status < 300) throw UnavailableError(what + ": malformed response");
  }
  if (res->status == 404) throw NotFoundError(what + ": " + message);
  if (res->status == 504) throw TimeoutError(what + ": " + message, "");
  if (res->status >= 300) throw UnavailableError(what + ": " + message);
  return body;
}

}  // namespace

std::string HttpBackend::create_session(const std::string& system_label) {
  auto it = systems_.find(system_label);
  if (it == systems_.end()) throw NotFoundError("unknown system '" + system_label + "'");
  httplib::Client client(base_url_);
  client.set_read_timeout(timeout_seconds_, 0);
  return checked(client.Post("/v1/sessions", it->second.dump(), "application/json"),
                 "orchestrator")
      .at("id")
      .get<std::string>();
}

json HttpBackend::send_turn(const std::string& backend_session, const std::string& text) {
  httplib::Client client(base_url_);
  client.set_read_timeout(timeout_seconds_, 0);
  const json trace = checked(client.Post("/v1/sessions/" + backend_session + "/turns",
                                         json{{"text", text}}.dump(), "application/json"),
                             "orchestrator");
  return {{"response", trace.at("response")}, {"trace", trace}};
}

std::string Aggregate::formatted() const {
  if (n == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f ± %.1f", mean, stddev);
  return buf;
}

HumanEvalService::HumanEvalService(Store& store, DialogueBackend& backend,
                                   QuestionnaireConfig questionnaire, std::vector<EvalTask> tasks,
                                   ServiceOptions options, Clock clock)
    : store_(store),
      backend_(backend),
      questionnaire_(std::move(questionnaire)),
      tasks_(std::move(tasks)),
      options_(std::move(options)),
      clock_(clock),
      signer_(options_.token_secret, options_.token_ttl_seconds, clock) {
  if (options_.pseudonym_secret.empty()) options_.pseudonym_secret = options_.token_secret;
  std::set<std::string> ids;
  for (const auto& t : tasks_) {
    if (!ids.insert(t.task_id).second) throw ValidationError("duplicate task id '" + t.task_id + "'");
  }
  dummy_hash_ = hash_password("unused", options_.password_iterations);
}

std::string HumanEvalService::register_participant(const std::string& user_id,
                                                   const std::string& password, bool consent) {
  if (!consent) throw ValidationError("registration requires consent");
  if (user_id.empty() || user_id.size() > 64) throw ValidationError("user id must be 1-64 bytes");
  if (password.size() < 8) throw ValidationError("password must have at least 8 characters");
  Account a;
  a.user_id = user_id;
  a.credential = hash_password(password, options_.password_iterations);
  a.role = Role::kParticipant;
  a.consent_given = true;
  a.consent_at = clock_();
  store_.create_account(a);
  return user_id;
}

void HumanEvalService::provision_admin(const std::string& user_id, const std::string& password) {
  if (store_.account(user_id)) return;
  Account a;
  a.user_id = user_id;
  a.credential = hash_password(password, options_.password_iterations);
  a.role = Role::kAdministrator;
  store_.create_account(a);
}

std::string HumanEvalService::login(const std::string& user_id, const std::string& password) const {
  const auto account = store_.account(user_id);
  // Hash either way so timing does not reveal whether the account exists.
  const bool ok = verify_password(password, account ? account->credential : dummy_hash_);
  if (!account || !ok) throw AuthError("invalid credentials");
  return signer_.issue(account->user_id, account->role);
}

Claims HumanEvalService::authenticate(const std::string& header) const {
  static const std::string kPrefix = "Bearer ";
  if (header.compare(0, kPrefix.size(), kPrefix) != 0) throw AuthError("missing bearer token");
  const Claims claims = signer_.verify(header.substr(kPrefix.size()));
  const auto account = store_.account(claims.sub);
  if (!account || account->role != claims.role) throw AuthError("token subject is not valid");
  return claims;
}

void HumanEvalService::require_role(const Claims& claims, Role role) {
  if (claims.role != role) {
    throw ForbiddenError(std::string("requires role ") + to_string(role));
  }
}

void HumanEvalService::give_consent(const Claims& claims) {
  auto account = store_.account(claims.sub);
  if (!account) throw AuthError("unknown account");
  if (account->consent_given) return;
  account->consent_given = true;
  account->consent_at = clock_();
  store_.update_account(*account);
}

json HumanEvalService::me(const Claims& claims) const {
  const auto account = store_.account(claims.sub);
  if (!account) throw AuthError("unknown account");
  return {{"user_id", account->user_id},
          {"role", to_string(account->role)},
          {"consent_given", account->consent_given},
          {"expires_at", claims.exp}};
}

std::vector<const EvalTask*> HumanEvalService::schedule_for(const std::string& user_id) const {
  std::vector<const EvalTask*> schedule;
  for (const auto& t : tasks_) {
    for (size_t i = 0; i < t.dialogues_per_participant; ++i) schedule.push_back(&t);
  }
  const std::string digest = hmac_sha256(options_.pseudonym_secret, "schedule:" + user_id);
  uint64_t seed = 0;
  std::memcpy(&seed, digest.data(), sizeof seed);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit modulo draw keeps the order stable across
  // standard library implementations.
  for (size_t i = schedule.size(); i > 1; --i) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % i;
    uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(schedule[i - 1], schedule[r % i]);
  }
  return schedule;
}

std::optional<Assignment> HumanEvalService::next_task(const Claims& claims) {
  require_role(claims, Role::kParticipant);
  const auto account = store_.account(claims.sub);
  if (!account || !account->consent_given) throw ForbiddenError("consent required");
  const auto schedule = schedule_for(claims.sub);
  std::lock_guard lock(assign_mu_);
  const size_t issued = store_.sessions_of(claims.sub).size();
  if (issued >= schedule.size()) return std::nullopt;
  const EvalTask& task = *schedule[issued];
  SessionRecord s;
  s.session_id = to_hex(random_bytes(12));
  s.user_id = claims.sub;
  s.task_id = task.task_id;
  s.system_label = task.system_label;
  s.backend_session = backend_.create_session(task.system_label);
  s.created_at = clock_();
  store_.create_session(s);
  return Assignment{task.task_id, s.session_id, task.scenario};
}

SessionRecord HumanEvalService::owned_session(const Claims& claims,
                                              const std::string& session_id) const {
  auto s = store_.session(session_id);
  if (!s) throw NotFoundError("unknown session '" + session_id + "'");
  if (s->user_id != claims.sub) throw ForbiddenError("session belongs to another participant");
  return *s;
}

json HumanEvalService::relay_turn(const Claims& claims, const std::string& session_id,
                                  const std::string& text) {
  require_role(claims, Role::kParticipant);
  const auto session = owned_session(claims, session_id);
  if (text.empty()) throw ValidationError("empty message");
  const json reply = backend_.send_turn(session.backend_session, text);
  const json turn = {{"user", text}, {"response", reply.at("response")}, {"trace", reply.at("trace")}};
  store_.append_turn(session_id, turn);
  return {{"turn", session.turns.size()}, {"response", reply.at("response")}};
}

json HumanEvalService::session_view(const Claims& claims, const std::string& session_id) const {
  require_role(claims, Role::kParticipant);
  const auto s = owned_session(claims, session_id);
  json turns = json::array();
  for (size_t i = 0; i < s.turns.size(); ++i) {
    turns.push_back({{"turn", i}, {"user", s.turns[i].at("user")}, {"response", s.turns[i].at("response")}});
  }
  return {{"session_id", s.session_id}, {"task_id", s.task_id}, {"turns", turns}};
}

FeedbackRecord HumanEvalService::submit_feedback(const Claims& claims, const json& body) {
  require_role(claims, Role::kParticipant);
  FeedbackRecord f;
  std::string question_id;
  try {
    f.session_id = body.at("session_id").get<std::string>();
    question_id = body.at("question_id").get<std::string>();
    if (body.contains("turn") && !body.at("turn").is_null()) f.turn = body.at("turn").get<size_t>();
    f.answer = body.at("answer");
  } catch (const json::exception& e) {
    throw ParseError("feedback", e.what());
  }
  const auto session = owned_session(claims, f.session_id);
  const Question* q = questionnaire_.find(question_id);
  if (!q) throw ValidationError("unknown question '" + question_id + "'");
  if (q->level == QuestionLevel::kUtterance) {
    if (!f.turn) throw ValidationError("utterance-level answers need a turn index");
    if (*f.turn >= session.turns.size()) throw ValidationError("turn index out of range");
  } else if (f.turn) {
    throw ValidationError("dialogue-level answers take no turn index");
  }
  switch (q->kind) {
    case QuestionKind::kLikert5:
      if (!f.answer.is_number_integer() || f.answer.get<int64_t>() < 1 || f.answer.get<int64_t>() > 5) {
        throw ValidationError("'" + q->id + "' expects an integer 1-5");
      }
      break;
    case QuestionKind::kBinary:
      if (!f.answer.is_boolean()) throw ValidationError("'" + q->id + "' expects a boolean");
      break;
    case QuestionKind::kFreetext:
      if (!f.answer.is_string()) throw ValidationError("'" + q->id + "' expects text");
      break;
  }
  f.user_id = claims.sub;
  f.question_id = question_id;
  f.timestamp = clock_();
  store_.put_feedback(f);
  return f;
}

std::vector<FeedbackRecord> HumanEvalService::own_feedback(
    const Claims& claims, const std::optional<std::string>& session_id) const {
  require_role(claims, Role::kParticipant);
  if (session_id) owned_session(claims, *session_id);
  std::vector<FeedbackRecord> out;
  for (const auto& f : store_.feedback()) {
    if (f.user_id == claims.sub && (!session_id || f.session_id == *session_id)) out.push_back(f);
  }
  return out;
}

std::string HumanEvalService::pseudonym(const std::string& user_id) const {
  return "p-" + to_hex(hmac_sha256(options_.pseudonym_secret, "user:" + user_id)).substr(0, 16);
}

json HumanEvalService::export_submissions(const Claims& claims,
                                          const std::optional<std::string>& system_label) const {
  require_role(claims, Role::kAdministrator);
  std::map<std::string, std::string> label_of;
  json sessions = json::array();
  for (const auto& s : store_.sessions()) {
    label_of[s.session_id] = s.system_label;
    if (system_label && s.system_label != *system_label) continue;
    sessions.push_back({{"session_id", s.session_id},
                        {"participant", pseudonym(s.user_id)},
                        {"task_id", s.task_id},
                        {"system_label", s.system_label},
                        {"created_at", s.created_at},
                        {"turns", s.turns}});
  }
  json feedback = json::array();
  for (const auto& f : store_.feedback()) {
    const std::string& label = label_of[f.session_id];
    if (system_label && label != *system_label) continue;
    feedback.push_back({{"participant", pseudonym(f.user_id)},
                        {"session_id", f.session_id},
                        {"system_label", label},
                        {"turn", f.turn ? json(*f.turn) : json(nullptr)},
                        {"question_id", f.question_id},
                        {"answer", f.answer},
                        {"timestamp", f.timestamp}});
  }
  return {{"sessions", sessions}, {"feedback", feedback}};
}

Aggregate HumanEvalService::aggregate(const Claims& claims, const std::string& system_label,
                                      const std::string& question_id) const {
  require_role(claims, Role::kAdministrator);
  const Question* q = questionnaire_.find(question_id);
  if (!q) throw NotFoundError("unknown question '" + question_id + "'");
  if (q->kind == QuestionKind::kFreetext) throw ValidationError("free-text answers have no score");
  std::map<std::string, std::string> label_of;
  for (const auto& s : store_.sessions()) label_of[s.session_id] = s.system_label;
  std::vector<double> values;
  for (const auto& f : store_.feedback()) {
    if (f.question_id != question_id || label_of[f.session_id] != system_label) continue;
    values.push_back(f.answer.is_boolean() ? (f.answer.get<bool>() ? 1.0 : 0.0)
                                           : f.answer.get<double>());
  }
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / a.n;
  double sq = 0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(sq / a.n);
  return a;
}

void mount_humaneval_routes(httplib::Server& server, HumanEvalService& service) {
  auto handle = [](httplib::Response& res, auto&& body) {
    auto fail = [&](int status, const std::string& message) {
      res.status = status;
      if (status == 401) res.set_header("WWW-Authenticate", "Bearer");
      res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    try {
      body();
    } catch (const json::exception& e) {
      fail(400, e.what());
    } catch (const ParseError& e) {
      fail(400, e.what());
    } catch (const AuthError& e) {
      fail(401, e.what());
    } catch (const ForbiddenError& e) {
      fail(403, e.what());
    } catch (const NotFoundError& e) {
      fail(404, e.what());
    } catch (const ConflictError& e) {
      fail(409, e.what());
    } catch (const ValidationError& e) {
      fail(422, e.what());
    } catch (const TimeoutError& e) {
      fail(504, e.what());
    } catch (const UnavailableError& e) {
      fail(503, e.what());
    }
  };
  auto send = [](httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };
  auto claims_of = [&service](const httplib::Request& req) {
    return service.authenticate(req.get_header_value("Authorization"));
  };
  auto query = [](const httplib::Request& req, const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };

  server.Get("/healthz", [send](const httplib::Request&, httplib::Response& res) {
    send(res, {{"status", "ok"}});
  });
  server.Get("/questionnaire", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.questionnaire().to_json());
  });
  server.Get("/consent", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, {{"text", service.options().consent_text}});
  });
  server.Post("/auth/register", [&service, handle, send](const httplib::Request& req,
                                                         httplib::Response& res) {
    handle(res, [&] {
      const json body = json::parse(req.body);
      const std::string id = service.register_participant(body.at("username").get<std::string>(),
                                                          body.at("password").get<std::string>(),
                                                          body.value("consent", false));
      send(res, {{"user_id", id}, {"role", "participant"}}, 201);
    });
  });
  server.Post("/auth/login", [&service, handle, send](const httplib::Request& req,
                                                      httplib::Response& res) {
    handle(res, [&] {
      const json body = json::parse(req.body);
      const std::string token =
          service.login(body.at("username").get<std::string>(), body.at("password").get<std::string>());
      send(res, {{"token", token}, {"token_type", "Bearer"}});
    });
  });
  server.Get("/auth/me", [&service, handle, send, claims_of](const httplib::Request& req,
                                                             httplib::Response& res) {
    handle(res, [&] { send(res, service.me(claims_of(req))); });
  });
  server.Post("/auth/consent", [&service, handle, send, claims_of](const httplib::Request& req,
                                                                   httplib::Response& res) {
    handle(res, [&] {
      const auto claims = claims_of(req);
      service.give_consent(claims);
      send(res, service.me(claims));
    });
  });
  server.Get("/tasks/next", [&service, handle, send, claims_of](const httplib::Request& req,
                                                                httplib::Response& res) {
    handle(res, [&] {
      const auto a = service.next_task(claims_of(req));
      if (!a) {
        send(res, {{"task", nullptr}});
        return;
      }
      send(res, {{"task", {{"task_id", a->task_id}, {"scenario", a->scenario}}},
                 {"session_id", a->session_id}});
    });
  });
  server.Post(R"(/sessions/([^/]+)/turns)", [&service, handle, send, claims_of](
                                                const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      const auto claims = claims_of(req);
      const json body = json::parse(req.body);
      send(res, service.relay_turn(claims, req.matches[1], body.at("text").get<std::string>()));
    });
  });
  server.Get(R"(/sessions/([^/]+))", [&service, handle, send, claims_of](const httplib::Request& req,
                                                                         httplib::Response& res) {
    handle(res, [&] { send(res, service.session_view(claims_of(req), req.matches[1])); });
  });
  server.Post("/feedback", [&service, handle, send, claims_of](const httplib::Request& req,
                                                               httplib::Response& res) {
    handle(res, [&] {
      const auto claims = claims_of(req);
      const auto f = service.submit_feedback(claims, json::parse(req.body));
      json out = to_json(f);
      out.erase("user_id");
      send(res, out, 201);
    });
  });
  server.Get("/feedback", [&service, handle, send, claims_of, query](const httplib::Request& req,
                                                                     httplib::Response& res) {
    handle(res, [&] {
      json list = json::array();
      for (const auto& f : service.own_feedback(claims_of(req), query(req, "session_id"))) {
        json j = to_json(f);
        j.erase("user_id");
        list.push_back(j);
      }
      send(res, {{"feedback", list}});
    });
  });
  server.Get("/admin/export", [&service, handle, send, claims_of, query](const httplib::Request& req,
                                                                         httplib::Response& res) {
    handle(res, [&] { send(res, service.export_submissions(claims_of(req), query(req, "system"))); });
  });
  server.Get("/admin/aggregate", [&service, handle, send, claims_of, query](
                                     const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      const auto claims = claims_of(req);
      const auto system = query(req, "system");
      const auto question = query(req, "question");
      HumanEvalService::require_role(claims, Role::kAdministrator);
      if (!system || !question) throw ParseError("aggregate", "system and question are required");
      const auto a = service.aggregate(claims, *system, *question);
      send(res, {{"system", *system},
                 {"question", *question},
                 {"mean", a.mean},
                 {"std", a.stddev},
                 {"n", a.n},
                 {"formatted", a.formatted()}});
    });
  });
}

}  // namespace dialight::humaneval
