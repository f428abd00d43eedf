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

#include "dialight/gateway/replay.hpp"

#include <fstream>

#include "dialight/codec/state_codec.hpp"
#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"

#include "httplib.h"

namespace dialight::gateway {

using nlohmann::json;

std::string ReplayScript::key(const std::string& dialogue_id, size_t turn, Task task) {
  return dialogue_id + ":" + std::to_string(turn) + ":" + to_string(task);
}

ReplayScript ReplayScript::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("script", "expected an object of key -> output");
  ReplayScript s;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ParseError("script/" + k, "output must be a string");
    // Keys are "<dialogue_id>:<turn>:<task>"; the id itself may contain ':'.
    const size_t last = k.rfind(':');
    const size_t mid = last == std::string::npos || last == 0 ? std::string::npos
                                                              : k.rfind(':', last - 1);
    if (mid == std::string::npos) throw ParseError("script/" + k, "malformed key");
    const std::string turn = k.substr(mid + 1, last - mid - 1);
    if (turn.empty() || turn.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("script/" + k, "turn must be a non-negative integer");
    }
    task_from_string(k.substr(last + 1));
    s.outputs_[k] = v.get<std::string>();
  }
  return s;
}

ReplayScript ReplayScript::load(const std::filesystem::path& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

ReplayScript ReplayScript::from_gold(const Corpus& corpus) {
  ReplayScript s;
  for (const auto& [id, d] : corpus.dialogues) {
    for (size_t t = 0; t < d.turns.size(); ++t) {
      s.set(id, t, Task::kDst, codec::linearize_state(d.turns[t].gold_state));
      s.set(id, t, Task::kRg, d.turns[t].gold_delex.text);
    }
  }
  return s;
}

void ReplayScript::set(const std::string& dialogue_id, size_t turn, Task task, std::string output) {
  outputs_[key(dialogue_id, turn, task)] = std::move(output);
}

const std::string* ReplayScript::find(const std::string& dialogue_id, size_t turn, Task task) const {
  auto it = outputs_.find(key(dialogue_id, turn, task));
  return it == outputs_.end() ? nullptr : &it->second;
}

json ReplayScript::to_json() const { return json(outputs_); }

void ReplayScript::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

std::string replay_lookup(const ReplayScript& script, const std::string& dialogue_id, size_t turn,
                          Task task, MissingPolicy policy) {
  if (const std::string* out = script.find(dialogue_id, turn, task)) return *out;
  if (policy == MissingPolicy::kEchoEmpty) return std::string();
  throw NotFoundError("no scripted output for " + ReplayScript::key(dialogue_id, turn, task));
}

ReplayServer::ReplayServer(ReplayScript script, MissingPolicy policy)
    : script_(std::move(script)), policy_(policy), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ReplayServer::~ReplayServer() { stop(); }

void ReplayServer::install_routes() {
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server_->Post("/v1/infer", [this](const httplib::Request& req, httplib::Response& res) {
    auto fail = [&](int status, const std::string& message) {
      res.status = status;
      res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    WireRequest wire;
    try {
      wire = wire_request_from_json(json::parse(req.body));
    } catch (const json::exception& e) {
      return fail(400, e.what());
    } catch (const ParseError& e) {
      return fail(400, e.what());
    }
    if (!wire.payload.dialogue_id || !wire.payload.turn) {
      return fail(400, "replay requests need payload.dialogue_id and payload.turn");
    }
    try {
      std::string output =
          replay_lookup(script_, *wire.payload.dialogue_id, *wire.payload.turn, wire.task, policy_);
      served_.fetch_add(1);
      res.set_content(json{{"output", std::move(output)}, {"request_id", wire.request_id}}.dump(),
                      "application/json");
    } catch (const NotFoundError& e) {
      fail(404, e.what());
    }
  });
}

int ReplayServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw UnavailableError("cannot bind replay server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ReplayServer::listen_blocking(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw UnavailableError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ReplayServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ReplayServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace dialight::gateway
