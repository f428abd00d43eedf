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

#include "dialight/config/deployment.hpp"

#include <cstdlib>

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"
#include "dialight/realization/realization.hpp"

namespace dialight::config {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string secret(const json& j, const std::string& what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("env")) {
    const std::string name = j.at("env").get<std::string>();
    const char* value = std::getenv(name.c_str());
    if (!value || !*value) throw ValidationError(what + ": environment variable " + name + " is unset");
    return value;
  }
  throw ValidationError(what + ": expected a string or {\"env\": NAME}");
}

Listen listen_from_json(const json& j, Listen fallback) {
  fallback.host = j.value("host", fallback.host);
  fallback.port = j.value("port", fallback.port);
  return fallback;
}

}  // namespace

db::MatchOptions match_options_from_json(const json& j) {
  db::MatchOptions m;
  m.threshold = j.value("threshold", m.threshold);
  if (j.contains("dontcare")) {
    m.dontcare.clear();
    for (const auto& v : j.at("dontcare")) m.dontcare.insert(text::normalize(v.get<std::string>()));
  }
  if (j.contains("aliases")) {
    for (const auto& [domain, slots] : j.at("aliases").items()) {
      for (const auto& [slot, attr] : slots.items()) {
        m.aliases[text::normalize(domain)][text::normalize(slot)] =
            text::normalize(attr.get<std::string>());
      }
    }
  }
  if (j.contains("slot_match")) {
    for (const auto& [domain, slots] : j.at("slot_match").items()) {
      for (const auto& [slot, mode] : slots.items()) {
        m.slot_match[text::normalize(domain)][text::normalize(slot)] =
            db::slot_match_from_string(mode.get<std::string>());
      }
    }
  }
  return m;
}

DeploymentConfig parse_deployment_config(const json& j, const std::filesystem::path& base_dir) {
  DeploymentConfig c;
  c.base_dir = base_dir;
  try {
    const json& data = j.at("data");
    c.ontology = resolve(base_dir, data.at("ontology").get<std::string>());
    c.db_dir = resolve(base_dir, data.at("db_dir").get<std::string>());
    if (data.contains("prompt_templates")) {
      c.prompt_templates = resolve(base_dir, data.at("prompt_templates").get<std::string>());
    }
    if (data.contains("icl_pool")) c.icl_pool = resolve(base_dir, data.at("icl_pool").get<std::string>());
    c.icl_pool_language = data.value("icl_pool_language", c.icl_pool_language);

    if (j.contains("database")) c.match = match_options_from_json(j.at("database"));
    if (j.contains("summaries")) c.summaries = realization::SummaryTemplates::from_json(j.at("summaries"));

    if (j.contains("gateway")) {
      const json& g = j.at("gateway");
      c.gateway_listen = listen_from_json(g, c.gateway_listen);
      if (g.contains("timeout_ms")) c.gateway_options.timeout = std::chrono::milliseconds(g.at("timeout_ms").get<int64_t>());
      if (g.contains("probe_timeout_ms")) {
        c.gateway_options.probe_timeout = std::chrono::milliseconds(g.at("probe_timeout_ms").get<int64_t>());
      }
      for (const auto& b : g.value("backends", json::array())) c.backends.push_back(gateway::backend_from_json(b));
    }
    const json systems = j.value("systems", json::object());
    for (const auto& [label, system] : systems.items()) {
      orchestrator::system_config_from_json(system);  // validate early
      c.systems[label] = system;
    }

    if (j.contains("humaneval")) {
      const json& h = j.at("humaneval");
      c.humaneval_listen = listen_from_json(h, c.humaneval_listen);
      c.orchestrator_url = h.value("orchestrator_url", std::string());
      c.service.token_secret = secret(h.at("token_secret"), "token_secret");
      c.service.token_ttl_seconds = h.value("token_ttl_seconds", c.service.token_ttl_seconds);
      if (h.contains("pseudonym_secret")) c.service.pseudonym_secret = secret(h.at("pseudonym_secret"), "pseudonym_secret");
      c.service.password_iterations = h.value("password_iterations", c.service.password_iterations);
      c.service.consent_text = h.value("consent_text", c.service.consent_text);
      c.storage_path = resolve(base_dir, h.value("storage_path", c.storage_path.string()));
      if (h.contains("questionnaire")) c.questionnaire = resolve(base_dir, h.at("questionnaire").get<std::string>());
      for (const auto& a : h.value("admins", json::array())) {
        c.admins.push_back({a.at("username").get<std::string>(), secret(a.at("password"), "admin password")});
      }
      for (const auto& t : h.value("tasks", json::array())) {
        humaneval::EvalTask task;
        task.task_id = t.at("task_id").get<std::string>();
        task.system_label = t.at("system_label").get<std::string>();
        task.dialogues_per_participant = t.value("dialogues_per_participant", task.dialogues_per_participant);
        task.scenario = t.value("scenario", json::object());
        if (!c.systems.count(task.system_label)) {
          throw ValidationError("task '" + task.task_id + "' names unknown system '" + task.system_label + "'");
        }
        c.tasks.push_back(std::move(task));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError("deployment config", e.what());
  }
  return c;
}

DeploymentConfig load_deployment_config(const std::filesystem::path& path) {
  return parse_deployment_config(read_json_file(path), path.parent_path());
}

std::shared_ptr<orchestrator::PipelineResources> build_resources(const DeploymentConfig& c) {
  auto r = std::make_shared<orchestrator::PipelineResources>();
  r->ontology = load_ontology(c.ontology);
  r->database = db::load_database_dir(c.db_dir);
  r->match = c.match;
  r->summaries = c.summaries;
  if (c.prompt_templates) r->prompts = prompt::PromptTemplates::load(*c.prompt_templates);
  if (c.icl_pool) {
    LoadOptions options;
    options.language = c.icl_pool_language;
    options.split = "train";
    auto dataset = load_dataset(*c.icl_pool, c.ontology, options);
    r->placeholders = realization::placeholder_inventory(dataset.corpus);
    r->icl_pool = std::move(dataset.corpus);
  }
  if (r->placeholders.empty()) {
    for (const auto& d : r->ontology.domains()) {
      for (const auto& [slot, spec] : r->ontology.slots(d)) r->placeholders.insert("[value_" + slot + "]");
    }
  }
  return r;
}

humaneval::QuestionnaireConfig load_questionnaire(const DeploymentConfig& c) {
  if (!c.questionnaire) return humaneval::QuestionnaireConfig::defaults();
  return humaneval::QuestionnaireConfig::from_json(read_json_file(*c.questionnaire));
}

}  // namespace dialight::config
