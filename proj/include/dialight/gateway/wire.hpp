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

#include <optional>
#include <string>
#include <vector>

#include "dialight/core/types.hpp"

#include "json.hpp"

namespace dialight::gateway {

enum class Task { kDst, kRg };
enum class Mode { kStructured, kPrompted };

const char* to_string(Task t);
const char* to_string(Mode m);
Task task_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);

// Body of POST /v1/infer. `dialogue_id` and `turn` identify the position in a
// scripted dialogue; model servers other than the replay server ignore them.
struct InferencePayload {
  std::vector<Utterance> history;
  std::optional<std::string> db_summary;
  std::optional<std::string> language;
  std::optional<std::string> prompt;
  std::optional<std::string> dialogue_id;
  std::optional<size_t> turn;

  bool operator==(const InferencePayload&) const = default;
};

struct InferenceRequest {
  std::string backend_id;
  Task task = Task::kDst;
  std::string session_id;
  InferencePayload payload;
  std::string request_id;
};

// `output` is raw model text; the gateway never interprets it.
struct InferenceResponse {
  std::string output;
  double latency_ms = 0.0;
  std::string instance_id;
  std::string request_id;
};

struct WireRequest {
  Task task = Task::kDst;
  Mode mode = Mode::kStructured;
  InferencePayload payload;
  std::string request_id;
};

nlohmann::json to_json(const WireRequest& r);
// Throws ParseError on malformed bodies.
WireRequest wire_request_from_json(const nlohmann::json& j);

}  // namespace dialight::gateway
