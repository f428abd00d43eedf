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

// Model connector and orchestrator behind one HTTP listener.
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"

#include "dialight/config/deployment.hpp"
#include "dialight/core/error.hpp"

using namespace dialight;

namespace {
httplib::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gateway: backend registry, routing and dialogue sessions"};
  std::string config_path;
  int register_retries = 30;
  app.add_option("--config", config_path, "Deployment config JSON")->required();
  app.add_option("--register-retries", register_retries,
                 "Seconds to keep retrying configured backends that are not up yet");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = config::load_deployment_config(config_path);
    gateway::ModelGateway models(config.gateway_options);
    for (const auto& backend : config.backends) {
      for (int attempt = 0;; ++attempt) {
        try {
          models.register_backend(backend);
          break;
        } catch (const UnavailableError&) {
          if (attempt >= register_retries) throw;
          std::this_thread::sleep_for(std::chrono::seconds(1));
        }
      }
      std::cerr << "registered backend " << backend.id << "\n";
    }
    orchestrator::Orchestrator orch(config::build_resources(config), models);

    httplib::Server server;
    gateway::mount_admin_routes(server, models);
    orchestrator::mount_session_routes(server, orch);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "gateway on " << config.gateway_listen.host << ":" << config.gateway_listen.port << "\n";
    if (!server.listen(config.gateway_listen.host, config.gateway_listen.port)) {
      throw std::runtime_error("cannot listen");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
