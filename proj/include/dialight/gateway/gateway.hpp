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
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dialight/gateway/wire.hpp"

#include "json.hpp"

namespace httplib {
class Server;
}

namespace dialight::gateway {

struct BackendDescriptor {
  std::string id;
  Task task = Task::kDst;
  Mode mode = Mode::kStructured;
  std::vector<std::string> instances;  // base URLs, e.g. "http://127.0.0.1:8101"
};

nlohmann::json to_json(const BackendDescriptor& d);
BackendDescriptor backend_from_json(const nlohmann::json& j);

struct GatewayOptions {
  std::chrono::milliseconds timeout{120'000};
  std::chrono::milliseconds probe_timeout{2'000};
};

// The model connector: a registry of stateless model backends and a
// round-robin router across each backend's instances.
class ModelGateway {
 public:
  explicit ModelGateway(GatewayOptions options = {});
  ~ModelGateway();

  // Probes every instance's /healthz. Throws ValidationError for an empty
  // instance list, UnavailableError when no instance answers and
  // ConflictError for a duplicate id.
  std::string register_backend(const BackendDescriptor& descriptor);
  bool has_backend(const std::string& id) const;
  BackendDescriptor backend(const std::string& id) const;
  std::vector<BackendDescriptor> backends() const;

  // Forwards to the next healthy instance in round-robin order. Requests of
  // one session complete in the order route() was entered.
  InferenceResponse route(const InferenceRequest& request);

  // Re-probes the instances of a backend; returns the number healthy.
  size_t refresh_health(const std::string& id);
  // Requests served per instance URL.
  std::map<std::string, size_t> served_counts(const std::string& id) const;

 private:
  struct Instance {
    std::string url;
    std::atomic<bool> healthy{true};
    std::atomic<size_t> served{0};
  };
  struct Backend {
    BackendDescriptor descriptor;
    std::vector<std::unique_ptr<Instance>> instances;
    std::atomic<uint64_t> next{0};
  };
  struct SessionQueue {
    std::mutex mu;
    std::condition_variable cv;
    uint64_t next_ticket = 0;
    uint64_t serving = 0;
  };

  std::shared_ptr<Backend> find_backend(const std::string& id) const;
  std::shared_ptr<SessionQueue> enter_session(const std::string& session_id, uint64_t* ticket);
  void leave_session(const std::string& session_id, const std::shared_ptr<SessionQueue>& q);

  GatewayOptions options_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Backend>> backends_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionQueue>> sessions_;
  std::atomic<uint64_t> request_counter_{0};
};

// GET /healthz, GET /v1/backends, POST /v1/backends.
void mount_admin_routes(httplib::Server& server, ModelGateway& gateway);

}  // namespace dialight::gateway
