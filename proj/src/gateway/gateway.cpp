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

#include "dialight/gateway/gateway.hpp"

#include "dialight/core/error.hpp"

#include "httplib.h"

namespace dialight::gateway {

using nlohmann::json;

namespace {

template <typename Duration>
void set_timeouts(httplib::Client& client, Duration timeout) {
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());
}

bool probe(const std::string& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url);
  set_timeouts(client, timeout);
  auto res = client.Get("/healthz");
  return res && res->status == 200;
}

}  // namespace

json to_json(const BackendDescriptor& d) {
  return {{"id", d.id},
          {"task", to_string(d.task)},
          {"mode", to_string(d.mode)},
          {"instances", d.instances}};
}

BackendDescriptor backend_from_json(const json& j) {
  BackendDescriptor d;
  try {
    d.id = j.at("id").get<std::string>();
    d.task = task_from_string(j.at("task").get<std::string>());
    d.mode = mode_from_string(j.value("mode", std::string("structured")));
    if (j.contains("instances")) {
      d.instances = j.at("instances").get<std::vector<std::string>>();
    } else if (j.contains("endpoint")) {
      d.instances = {j.at("endpoint").get<std::string>()};
    }
  } catch (const json::exception& e) {
    throw ParseError("backend", e.what());
  }
  return d;
}

ModelGateway::ModelGateway(GatewayOptions options) : options_(options) {}
ModelGateway::~ModelGateway() = default;

std::string ModelGateway::register_backend(const BackendDescriptor& descriptor) {
  if (descriptor.id.empty()) throw ValidationError("backend id must not be empty");
  if (descriptor.instances.empty()) {
    throw ValidationError("backend '" + descriptor.id + "' has no instances");
  }
  {
    std::shared_lock lock(registry_mu_);
    if (backends_.count(descriptor.id)) {
      throw ConflictError("backend '" + descriptor.id + "' is already registered");
    }
  }
  auto backend = std::make_shared<Backend>();
  backend->descriptor = descriptor;
  size_t healthy = 0;
  for (const auto& url : descriptor.instances) {
    auto inst = std::make_unique<Instance>();
    inst->url = url;
    inst->healthy = probe(url, options_.probe_timeout);
    healthy += inst->healthy ? 1 : 0;
    backend->instances.push_back(std::move(inst));
  }
  if (healthy == 0) {
    throw UnavailableError("no instance of backend '" + descriptor.id + "' is reachable");
  }
  std::unique_lock lock(registry_mu_);
  if (!backends_.emplace(descriptor.id, std::move(backend)).second) {
    throw ConflictError("backend '" + descriptor.id + "' is already registered");
  }
  return descriptor.id;
}

bool ModelGateway::has_backend(const std::string& id) const {
  std::shared_lock lock(registry_mu_);
  return backends_.count(id) > 0;
}

std::shared_ptr<ModelGateway::Backend> ModelGateway::find_backend(const std::string& id) const {
  std::shared_lock lock(registry_mu_);
  auto it = backends_.find(id);
  if (it == backends_.end()) throw NotFoundError("unknown backend '" + id + "'");
  return it->second;
}

BackendDescriptor ModelGateway::backend(const std::string& id) const {
  return find_backend(id)->descriptor;
}

std::vector<BackendDescriptor> ModelGateway::backends() const {
  std::shared_lock lock(registry_mu_);
  std::vector<BackendDescriptor> out;
  for (const auto& [id, b] : backends_) out.push_back(b->descriptor);
  return out;
}

size_t ModelGateway::refresh_health(const std::string& id) {
  auto backend = find_backend(id);
  size_t healthy = 0;
  for (auto& inst : backend->instances) {
    inst->healthy = probe(inst->url, options_.probe_timeout);
    healthy += inst->healthy ? 1 : 0;
  }
  return healthy;
}

std::map<std::string, size_t> ModelGateway::served_counts(const std::string& id) const {
  auto backend = find_backend(id);
  std::map<std::string, size_t> out;
  for (const auto& inst : backend->instances) out[inst->url] = inst->served.load();
  return out;
}

std::shared_ptr<ModelGateway::SessionQueue> ModelGateway::enter_session(
    const std::string& session_id, uint64_t* ticket) {
  std::lock_guard lock(sessions_mu_);
  auto& q = sessions_[session_id];
  if (!q) q = std::make_shared<SessionQueue>();
  std::lock_guard qlock(q->mu);
  *ticket = q->next_ticket++;
  return q;
}

void ModelGateway::leave_session(const std::string& session_id,
                                 const std::shared_ptr<SessionQueue>& q) {
  std::lock_guard lock(sessions_mu_);
  {
    std::lock_guard qlock(q->mu);
    ++q->serving;
    q->cv.notify_all();
    if (q->serving != q->next_ticket) return;
  }
  // Nobody is waiting; drop the queue.
  auto it = sessions_.find(session_id);
  if (it != sessions_.end() && it->second == q) sessions_.erase(it);
}

InferenceResponse ModelGateway::route(const InferenceRequest& request) {
  auto backend = find_backend(request.backend_id);
  if (backend->descriptor.task != request.task) {
    throw ValidationError("backend '" + request.backend_id + "' serves " +
                          to_string(backend->descriptor.task) + ", not " + to_string(request.task));
  }

  uint64_t ticket = 0;
  auto queue = enter_session(request.session_id, &ticket);
  {
    std::unique_lock qlock(queue->mu);
    queue->cv.wait(qlock, [&] { return queue->serving == ticket; });
  }
  struct Leave {
    ModelGateway* self;
    const std::string& session;
    std::shared_ptr<SessionQueue> q;
    ~Leave() { self->leave_session(session, q); }
  } leave{this, request.session_id, queue};

  WireRequest wire;
  wire.task = request.task;
  wire.mode = backend->descriptor.mode;
  wire.payload = request.payload;
  wire.request_id = request.request_id.empty()
                        ? request.session_id + "-" + std::to_string(request_counter_.fetch_add(1))
                        : request.request_id;
  const std::string body = to_json(wire).dump();

  const size_t m = backend->instances.size();
  const uint64_t start = backend->next.fetch_add(1);
  std::string last_error = "no healthy instance";
  for (size_t attempt = 0; attempt < m; ++attempt) {
    Instance& inst = *backend->instances[(start + attempt) % m];
    if (!inst.healthy) continue;
    const auto t0 = std::chrono::steady_clock::now();
    auto post = [&] {
      httplib::Client client(inst.url);
      set_timeouts(client, options_.timeout);
      return client.Post("/v1/infer", body, "application/json");
    };
    auto res = post();
    auto timed_out = [&] {
      return res.error() == httplib::Error::Read &&
             std::chrono::steady_clock::now() - t0 >= options_.timeout * 9 / 10;
    };
    // One retry on the same instance absorbs a dropped connection; backends
    // are stateless, so a repeated request is harmless.
    if (!res && !timed_out()) res = post();
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    if (!res) {
      if (timed_out()) {
        throw TimeoutError("backend '" + request.backend_id + "' timed out on " + inst.url,
                           inst.url);
      }
      inst.healthy = false;
      last_error = inst.url + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      std::string message = res->body;
      try {
        message = json::parse(res->body).value("error", res->body);
      } catch (const json::exception&) {
      }
      if (res->status == 404) throw NotFoundError(inst.url + ": " + message);
      if (res->status >= 400 && res->status < 500) throw ValidationError(inst.url + ": " + message);
      throw UnavailableError(inst.url + ": backend failure: " + message);
    }
    InferenceResponse out;
    try {
      const json j = json::parse(res->body);
      out.output = j.at("output").get<std::string>();
      out.request_id = j.value("request_id", wire.request_id);
    } catch (const json::exception& e) {
      throw UnavailableError(inst.url + ": malformed response: " + e.what());
    }
    out.instance_id = inst.url;
    out.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    inst.served.fetch_add(1);
    return out;
  }
  throw UnavailableError("backend '" + request.backend_id + "' unavailable: " + last_error);
}

void mount_admin_routes(httplib::Server& server, ModelGateway& gateway) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server.Get("/v1/backends", [&gateway](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& d : gateway.backends()) list.push_back(to_json(d));
    res.set_content(json{{"backends", list}}.dump(), "application/json");
  });
  server.Post("/v1/backends", [&gateway](const httplib::Request& req, httplib::Response& res) {
    auto fail = [&](int status, const std::string& message) {
      res.status = status;
      res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    try {
      const std::string id = gateway.register_backend(backend_from_json(json::parse(req.body)));
      res.status = 201;
      res.set_content(json{{"id", id}}.dump(), "application/json");
    } catch (const json::exception& e) {
      fail(400, e.what());
    } catch (const ParseError& e) {
      fail(400, e.what());
    } catch (const ValidationError& e) {
      fail(422, e.what());
    } catch (const ConflictError& e) {
      fail(409, e.what());
    } catch (const UnavailableError& e) {
      fail(502, e.what());
    }
  });
}

}  // namespace dialight::gateway
