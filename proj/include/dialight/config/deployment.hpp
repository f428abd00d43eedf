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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dialight/db/database.hpp"
#include "dialight/gateway/gateway.hpp"
#include "dialight/humaneval/service.hpp"
#include "dialight/orchestrator/orchestrator.hpp"

#include "json.hpp"

namespace dialight::config {

struct Listen {
  std::string host = "127.0.0.1";
  int port = 0;
};

struct AdminAccount {
  std::string username;
  std::string password;
};

// The single declarative document every service reads. Relative paths are
// resolved against the document's directory.
struct DeploymentConfig {
  std::filesystem::path base_dir;

  std::filesystem::path ontology;
  std::filesystem::path db_dir;
  std::optional<std::filesystem::path> prompt_templates;
  std::optional<std::filesystem::path> icl_pool;
  std::string icl_pool_language = "eng";

  db::MatchOptions match;
  realization::SummaryTemplates summaries;

  Listen gateway_listen{"127.0.0.1", 8080};
  gateway::GatewayOptions gateway_options;
  std::vector<gateway::BackendDescriptor> backends;
  std::map<std::string, nlohmann::json> systems;  // blinded label -> SystemConfig

  Listen humaneval_listen{"127.0.0.1", 8090};
  std::string orchestrator_url;  // empty: run the orchestrator in-process
  humaneval::ServiceOptions service;
  std::filesystem::path storage_path = "humaneval.log";
  std::optional<std::filesystem::path> questionnaire;
  std::vector<AdminAccount> admins;
  std::vector<humaneval::EvalTask> tasks;
};

// Secrets may be given inline or as {"env": "NAME"}. Throws ParseError or
// ValidationError on malformed documents.
DeploymentConfig parse_deployment_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
DeploymentConfig load_deployment_config(const std::filesystem::path& path);

db::MatchOptions match_options_from_json(const nlohmann::json& j);

std::shared_ptr<orchestrator::PipelineResources> build_resources(const DeploymentConfig& c);
humaneval::QuestionnaireConfig load_questionnaire(const DeploymentConfig& c);

}  // namespace dialight::config
