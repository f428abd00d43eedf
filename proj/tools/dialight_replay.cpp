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

// Stateless scripted model server. Useful for oracle runs and offline tests.
#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "dialight/core/dataset.hpp"
#include "dialight/gateway/replay.hpp"

using namespace dialight;

namespace {
gateway::ReplayServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve scripted model outputs over POST /v1/infer"};
  std::string script_path, gold_corpus, ontology_path, host = "127.0.0.1";
  int port = 8100;
  bool echo_empty = false;
  auto* script_opt = app.add_option("--script", script_path, "Replay-script JSON");
  auto* gold_opt = app.add_option("--gold", gold_corpus, "Serve a corpus' gold annotations instead");
  app.add_option("--ontology", ontology_path, "Ontology (required with --gold)");
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_flag("--echo-empty", echo_empty, "Answer missing keys with an empty output instead of 404");
  script_opt->excludes(gold_opt);
  CLI11_PARSE(app, argc, argv);

  try {
    gateway::ReplayScript script;
    if (!gold_corpus.empty()) {
      if (ontology_path.empty()) throw std::runtime_error("--gold needs --ontology");
      script = gateway::ReplayScript::from_gold(load_dataset(gold_corpus, ontology_path).corpus);
    } else if (!script_path.empty()) {
      script = gateway::ReplayScript::load(script_path);
    } else {
      throw std::runtime_error("either --script or --gold is required");
    }
    gateway::ReplayServer server(std::move(script), echo_empty ? gateway::MissingPolicy::kEchoEmpty
                                                               : gateway::MissingPolicy::kError);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "replay server on " << host << ":" << port << "\n";
    server.listen_blocking(host, port);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
