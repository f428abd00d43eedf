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
#include <string>
#include <vector>

#include "dialight/humaneval/crypto.hpp"
#include "dialight/humaneval/store.hpp"

#include "json.hpp"

namespace httplib {
class Server;
}

namespace dialight::orchestrator {
class Orchestrator;
struct SystemConfig;
}  // namespace dialight::orchestrator

namespace dialight::humaneval {

enum class QuestionLevel { kUtterance, kDialogue };
enum class QuestionKind { kLikert5, kBinary, kFreetext };

struct Question {
  std::string id;
  QuestionLevel level = QuestionLevel::kDialogue;
  QuestionKind kind = QuestionKind::kLikert5;
  std::map<std::string, std::string> prompt;  // language -> text
};

struct QuestionnaireConfig {
  std::vector<Question> questions;

  // Six binary dialogue-level dimensions, an overall 1-5 rating and a 1-5
  // rating per system utterance.
  static QuestionnaireConfig defaults();
  // Throws ValidationError on duplicate ids or no dialogue-level question.
  static QuestionnaireConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  const Question* find(const std::string& id) const;
};

struct EvalTask {
  std::string task_id;
  std::string system_label;  // never shown to participants
  size_t dialogues_per_participant = 2;
  nlohmann::json scenario;
};

// Where participant turns go. Implementations are thread-safe.
class DialogueBackend {
 public:
  virtual ~DialogueBackend() = default;
  virtual std::string create_session(const std::string& system_label) = 0;
  // Returns {"response": <text>, "trace": <turn trace>}.
  virtual nlohmann::json send_turn(const std::string& backend_session, const std::string& text) = 0;
};

// Runs the orchestrator in the same process.
class InProcessBackend : public DialogueBackend {
 public:
  InProcessBackend(orchestrator::Orchestrator& orchestrator,
                   std::map<std::string, nlohmann::json> systems);
  std::string create_session(const std::string& system_label) override;
  nlohmann::json send_turn(const std::string& backend_session, const std::string& text) override;

 private:
  orchestrator::Orchestrator& orchestrator_;
  std::map<std::string, nlohmann::json> systems_;
};

// Talks to an orchestrator over its session routes.
class HttpBackend : public DialogueBackend {
 public:
  HttpBackend(std::string base_url, std::map<std::string, nlohmann::json> systems,
              int timeout_seconds = 120);
  std::string create_session(const std::string& system_label) override;
  nlohmann::json send_turn(const std::string& backend_session, const std::string& text) override;

 private:
  std::string base_url_;
  std::map<std::string, nlohmann::json> systems_;
  int timeout_seconds_;
};

struct ServiceOptions {
  std::string token_secret;
  int64_t token_ttl_seconds = 24 * 3600;
  std::string pseudonym_secret;  // defaults to the token secret
  int password_iterations = 100000;
  std::string consent_text = "I agree that my answers are stored for research purposes.";
};

struct Assignment {
  std::string task_id;
  std::string session_id;
  nlohmann::json scenario;
};

struct Aggregate {
  double mean = 0;
  double stddev = 0;  // population
  size_t n = 0;

  // "3.8 ± 0.9"; "n/a" without answers
  std::string formatted() const;
};

class HumanEvalService {
 public:
  HumanEvalService(Store& store, DialogueBackend& backend, QuestionnaireConfig questionnaire,
                   std::vector<EvalTask> tasks, ServiceOptions options,
                   Clock clock = system_clock());

  // Registration requires consent. Throws ValidationError without it and
  // ConflictError for a taken user id.
  std::string register_participant(const std::string& user_id, const std::string& password,
                                   bool consent);
  // Administrators only come from deployment config; an existing account is
  // left untouched.
  void provision_admin(const std::string& user_id, const std::string& password);

  // Same AuthError for an unknown user and a wrong password.
  std::string login(const std::string& user_id, const std::string& password) const;

  // Parses "Bearer <token>" and checks the account still exists.
  Claims authenticate(const std::string& authorization_header) const;
  // Throws ForbiddenError on a role mismatch.
  static void require_role(const Claims& claims, Role role);

  void give_consent(const Claims& claims);
  nlohmann::json me(const Claims& claims) const;

  // nullopt once the participant's quota is used up.
  std::optional<Assignment> next_task(const Claims& claims);
  nlohmann::json relay_turn(const Claims& claims, const std::string& session_id,
                            const std::string& text);
  nlohmann::json session_view(const Claims& claims, const std::string& session_id) const;

  FeedbackRecord submit_feedback(const Claims& claims, const nlohmann::json& body);
  std::vector<FeedbackRecord> own_feedback(const Claims& claims,
                                           const std::optional<std::string>& session_id) const;

  nlohmann::json export_submissions(const Claims& claims,
                                    const std::optional<std::string>& system_label) const;
  Aggregate aggregate(const Claims& claims, const std::string& system_label,
                      const std::string& question_id) const;

  std::string pseudonym(const std::string& user_id) const;
  const QuestionnaireConfig& questionnaire() const { return questionnaire_; }
  const ServiceOptions& options() const { return options_; }

 private:
  SessionRecord owned_session(const Claims& claims, const std::string& session_id) const;
  std::vector<const EvalTask*> schedule_for(const std::string& user_id) const;

  Store& store_;
  DialogueBackend& backend_;
  QuestionnaireConfig questionnaire_;
  std::vector<EvalTask> tasks_;
  ServiceOptions options_;
  Clock clock_;
  TokenSigner signer_;
  std::string dummy_hash_;
  std::mutex assign_mu_;
};

// The REST surface consumed by the browser front end.
void mount_humaneval_routes(httplib::Server& server, HumanEvalService& service);

}  // namespace dialight::humaneval
