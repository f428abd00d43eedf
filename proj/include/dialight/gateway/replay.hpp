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

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "dialight/core/types.hpp"
#include "dialight/gateway/wire.hpp"

#include "json.hpp"

namespace httplib {
class Server;
}

namespace dialight::gateway {

enum class MissingPolicy { kError, kEchoEmpty };

// Scripted model outputs keyed "<dialogue_id>:<turn>:<task>", turn 0-based.
// The same file format doubles as the evaluation prediction file.
class ReplayScript {
 public:
  static std::string key(const std::string& dialogue_id, size_t turn, Task task);

  static ReplayScript from_json(const nlohmann::json& j);
  static ReplayScript load(const std::filesystem::path& path);
  // Oracle script: linearized gold states for DST, gold delexicalized
  // responses for RG.
  static ReplayScript from_gold(const Corpus& corpus);

  void set(const std::string& dialogue_id, size_t turn, Task task, std::string output);
  const std::string* find(const std::string& dialogue_id, size_t turn, Task task) const;
  size_t size() const { return outputs_.size(); }
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> outputs_;
};

// Throws NotFoundError for a missing key under MissingPolicy::kError.
std::string replay_lookup(const ReplayScript& script, const std::string& dialogue_id, size_t turn,
                          Task task, MissingPolicy policy = MissingPolicy::kError);

// Stateless model server answering POST /v1/infer from a script. Serves
// GET /healthz for registration probes.
class ReplayServer {
 public:
  ReplayServer(ReplayScript script, MissingPolicy policy = MissingPolicy::kError);
  ~ReplayServer();
  ReplayServer(const ReplayServer&) = delete;
  ReplayServer& operator=(const ReplayServer&) = delete;

  // Binds (port 0 = any free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void listen_blocking(const std::string& host, int port);
  void stop();

  std::string url() const;
  size_t served() const { return served_.load(); }

 private:
  void install_routes();

  ReplayScript script_;
  MissingPolicy policy_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<size_t> served_{0};
};

}  // namespace dialight::gateway
