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

#include "dialight/gateway/wire.hpp"

#include "dialight/core/error.hpp"

namespace dialight::gateway {

using nlohmann::json;

const char* to_string(Task t) { return t == Task::kDst ? "dst" : "rg"; }
const char* to_string(Mode m) { return m == Mode::kStructured ? "structured" : "prompted"; }

Task task_from_string(const std::string& s) {
  if (s == "dst") return Task::kDst;
  if (s == "rg") return Task::kRg;
  throw ParseError("task", "unknown task '" + s + "'");
}

Mode mode_from_string(const std::string& s) {
  if (s == "structured") return Mode::kStructured;
  if (s == "prompted") return Mode::kPrompted;
  throw ParseError("mode", "unknown mode '" + s + "'");
}

json to_json(const WireRequest& r) {
  json payload = json::object();
  json history = json::array();
  for (const auto& u : r.payload.history) {
    history.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
  }
  payload["history"] = std::move(history);
  if (r.payload.db_summary) payload["db_summary"] = *r.payload.db_summary;
  if (r.payload.language) payload["language"] = *r.payload.language;
  if (r.payload.prompt) payload["prompt"] = *r.payload.prompt;
  if (r.payload.dialogue_id) payload["dialogue_id"] = *r.payload.dialogue_id;
  if (r.payload.turn) payload["turn"] = *r.payload.turn;
  return {{"task", to_string(r.task)},
          {"mode", to_string(r.mode)},
          {"payload", std::move(payload)},
          {"request_id", r.request_id}};
}

WireRequest wire_request_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("request", "body must be a JSON object");
  WireRequest r;
  try {
    r.task = task_from_string(j.at("task").get<std::string>());
    r.mode = mode_from_string(j.value("mode", std::string("structured")));
    r.request_id = j.value("request_id", std::string());
    const json& p = j.at("payload");
    if (!p.is_object()) throw ParseError("payload", "must be an object");
    if (p.contains("history")) {
      for (const auto& u : p.at("history")) {
        Utterance utt;
        utt.speaker = speaker_from_string(u.at("speaker").get<std::string>());
        utt.text = u.at("text").get<std::string>();
        r.payload.history.push_back(std::move(utt));
      }
    }
    if (p.contains("db_summary")) r.payload.db_summary = p.at("db_summary").get<std::string>();
    if (p.contains("language")) r.payload.language = p.at("language").get<std::string>();
    if (p.contains("prompt")) r.payload.prompt = p.at("prompt").get<std::string>();
    if (p.contains("dialogue_id")) r.payload.dialogue_id = p.at("dialogue_id").get<std::string>();
    if (p.contains("turn")) r.payload.turn = p.at("turn").get<size_t>();
  } catch (const json::exception& e) {
    throw ParseError("request", e.what());
  }
  if (r.mode == Mode::kPrompted && !r.payload.prompt) {
    throw ParseError("payload", "prompted requests need a prompt");
  }
  return r;
}

}  // namespace dialight::gateway
