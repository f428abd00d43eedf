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

// Human-evaluation back end.
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"

#include "dialight/config/deployment.hpp"

using namespace dialight;

namespace {
httplib::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human evaluation service"};
  std::string config_path;
  app.add_option("--config", config_path, "Deployment config JSON")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = config::load_deployment_config(config_path);
    humaneval::FileStore store(config.storage_path);
    if (store.dropped_lines()) std::cerr << "store: dropped a torn final record\n";

    // Without an orchestrator URL the pipeline runs in this process.
    std::unique_ptr<gateway::ModelGateway> models;
    std::unique_ptr<orchestrator::Orchestrator> orch;
    std::unique_ptr<humaneval::DialogueBackend> backend;
    if (config.orchestrator_url.empty()) {
      models = std::make_unique<gateway::ModelGateway>(config.gateway_options);
      for (const auto& b : config.backends) models->register_backend(b);
      orch = std::make_unique<orchestrator::Orchestrator>(config::build_resources(config), *models);
      backend = std::make_unique<humaneval::InProcessBackend>(*orch, config.systems);
    } else {
      backend = std::make_unique<humaneval::HttpBackend>(config.orchestrator_url, config.systems);
    }

    humaneval::HumanEvalService service(store, *backend, config::load_questionnaire(config),
                                        config.tasks, config.service);
    for (const auto& admin : config.admins) service.provision_admin(admin.username, admin.password);

    httplib::Server server;
    humaneval::mount_humaneval_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "humaneval on " << config.humaneval_listen.host << ":" << config.humaneval_listen.port << "\n";
    if (!server.listen(config.humaneval_listen.host, config.humaneval_listen.port)) {
      throw std::runtime_error("cannot listen");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
