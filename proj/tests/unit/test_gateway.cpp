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

#include <thread>

#include "dialight/core/dataset.hpp"
#include "dialight/core/error.hpp"
#include "dialight/gateway/gateway.hpp"
#include "dialight/gateway/replay.hpp"
#include "doctest.h"
#include "httplib.h"
#include "test_support.hpp"

using namespace dialight;
using namespace dialight::gateway;
using nlohmann::json;

namespace {

GatewayOptions fast_options() {
  GatewayOptions o;
  o.timeout = std::chrono::milliseconds(5000);
  o.probe_timeout = std::chrono::milliseconds(500);
  return o;
}

InferenceRequest dst_request(const std::string& backend, const std::string& session,
                             const std::string& dialogue, size_t turn) {
  InferenceRequest r;
  r.backend_id = backend;
  r.task = Task::kDst;
  r.session_id = session;
  r.payload.history = {{Speaker::kUser, "hello"}};
  r.payload.dialogue_id = dialogue;
  r.payload.turn = turn;
  return r;
}

}  // namespace

TEST_CASE("replay script keys and lookup") {
  ReplayScript s;
  s.set("d1", 1, Task::kDst, "taxi # departure = x");
  CHECK(ReplayScript::key("d1", 1, Task::kDst) == "d1:1:dst");
  CHECK(replay_lookup(s, "d1", 1, Task::kDst) == "taxi # departure = x");
  CHECK_THROWS_AS(replay_lookup(s, "d1", 2, Task::kDst), NotFoundError);
  CHECK(replay_lookup(s, "d1", 2, Task::kDst, MissingPolicy::kEchoEmpty) == "");

  auto back = ReplayScript::from_json(s.to_json());
  CHECK(back.size() == 1);
  CHECK_THROWS_AS(ReplayScript::from_json(json{{"d1:x:dst", "a"}}), ParseError);
  CHECK_THROWS_AS(ReplayScript::from_json(json{{"d1:0:dst", 3}}), ParseError);
}

TEST_CASE("gold script replays linearized gold states and delex responses") {
  auto d = load_dataset(testing::data("gold_corpus.json"), testing::data("ontology.json"));
  auto s = ReplayScript::from_gold(d.corpus);
  CHECK(s.size() == 2 * d.corpus.turn_count());
  CHECK(replay_lookup(s, "d01", 0, Task::kDst) == "restaurant # area = centre ; pricerange = cheap");
  CHECK(replay_lookup(s, "d01", 1, Task::kRg) == "the phone number is [value_phone] .");
}

TEST_CASE("wire request round trip") {
  WireRequest w;
  w.task = Task::kRg;
  w.mode = Mode::kPrompted;
  w.payload.history = {{Speaker::kUser, "hi"}, {Speaker::kSystem, "hello"}};
  w.payload.db_summary = "hotel has no result found";
  w.payload.prompt = "### task";
  w.request_id = "r1";
  const auto back = wire_request_from_json(to_json(w));
  CHECK(back.task == Task::kRg);
  CHECK(back.mode == Mode::kPrompted);
  CHECK(back.payload == w.payload);
  CHECK_THROWS_AS(wire_request_from_json(json{{"task", "dst"}}), ParseError);
  CHECK_THROWS_AS(wire_request_from_json(json{{"task", "nlu"}, {"mode", "structured"}, {"payload", json::object()}}),
                  ParseError);
}

TEST_CASE("registration") {
  ReplayScript script;
  script.set("d1", 1, Task::kDst, "taxi # departure = x");
  ReplayServer server(script);
  server.start();
  ModelGateway gw(fast_options());

  CHECK(gw.register_backend({"dst", Task::kDst, Mode::kStructured, {server.url()}}) == "dst");
  CHECK(gw.has_backend("dst"));
  CHECK_THROWS_AS(gw.register_backend({"dst", Task::kDst, Mode::kStructured, {server.url()}}), ConflictError);
  CHECK_THROWS_AS(gw.register_backend({"dead", Task::kDst, Mode::kStructured, {"http://127.0.0.1:1"}}),
                  UnavailableError);
  CHECK_FALSE(gw.has_backend("dead"));
  CHECK_THROWS_AS(gw.register_backend({"empty", Task::kDst, Mode::kStructured, {}}), ValidationError);

  CHECK(gw.route(dst_request("dst", "s", "d1", 1)).output == "taxi # departure = x");
  CHECK_THROWS_AS(gw.route(dst_request("nope", "s", "d1", 1)), NotFoundError);
  CHECK_THROWS_AS(gw.route(dst_request("dst", "s", "d1", 7)), NotFoundError);
  auto rg = dst_request("dst", "s", "d1", 1);
  rg.task = Task::kRg;
  CHECK_THROWS_AS(gw.route(rg), ValidationError);
}

TEST_CASE("round robin across instances") {
  ReplayScript script;
  for (size_t t = 0; t < 64; ++t) script.set("d", t, Task::kDst, "o" + std::to_string(t));
  ReplayServer a(script), b(script);
  a.start();
  b.start();
  ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {a.url(), b.url()}});

  std::vector<std::string> order;
  for (size_t t = 0; t < 4; ++t) order.push_back(gw.route(dst_request("dst", "s", "d", t)).instance_id);
  CHECK(order == std::vector<std::string>{a.url(), b.url(), a.url(), b.url()});

  for (size_t t = 4; t < 64; ++t) gw.route(dst_request("dst", "s", "d", t));
  auto counts = gw.served_counts("dst");
  CHECK(counts[a.url()] == 32);
  CHECK(counts[b.url()] == 32);
}

TEST_CASE("a dead instance is skipped") {
  ReplayScript script;
  script.set("d", 0, Task::kDst, "ok");
  ReplayServer a(script), b(script);
  a.start();
  b.start();
  ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {a.url(), b.url()}});
  b.stop();
  for (int i = 0; i < 4; ++i) CHECK(gw.route(dst_request("dst", "s", "d", 0)).instance_id == a.url());
  a.stop();
  CHECK_THROWS_AS(gw.route(dst_request("dst", "s", "d", 0)), UnavailableError);
}

TEST_CASE("replay responses depend only on the payload") {
  ReplayScript script;
  script.set("d", 0, Task::kDst, "hotel # area = north");
  script.set("d", 1, Task::kDst, "hotel # area = centre");
  ReplayServer server(script);
  server.start();
  ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {server.url()}});
  const auto x1 = gw.route(dst_request("dst", "s1", "d", 0)).output;
  gw.route(dst_request("dst", "s2", "d", 1));
  const auto x2 = gw.route(dst_request("dst", "s2", "d", 0)).output;
  gw.route(dst_request("dst", "s1", "d", 1));
  const auto x3 = gw.route(dst_request("dst", "s1", "d", 0)).output;
  CHECK(x1 == x2);
  CHECK(x2 == x3);
}

TEST_CASE("concurrent sessions only see their own outputs") {
  constexpr int kSessions = 32;
  constexpr size_t kTurns = 6;
  ReplayScript script;
  for (int s = 0; s < kSessions; ++s) {
    for (size_t t = 0; t < kTurns; ++t) {
      script.set("dlg" + std::to_string(s), t, Task::kDst, "out-" + std::to_string(s) + "-" + std::to_string(t));
    }
  }
  ReplayServer a(script), b(script);
  a.start();
  b.start();
  ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {a.url(), b.url()}});

  std::vector<std::vector<std::string>> got(kSessions);
  std::vector<std::thread> threads;
  for (int s = 0; s < kSessions; ++s) {
    threads.emplace_back([&, s] {
      for (size_t t = 0; t < kTurns; ++t) {
        got[s].push_back(
            gw.route(dst_request("dst", "session-" + std::to_string(s), "dlg" + std::to_string(s), t)).output);
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int s = 0; s < kSessions; ++s) {
    REQUIRE(got[s].size() == kTurns);
    for (size_t t = 0; t < kTurns; ++t) {
      CHECK(got[s][t] == "out-" + std::to_string(s) + "-" + std::to_string(t));
    }
  }
  auto counts = gw.served_counts("dst");
  CHECK(counts[a.url()] == kSessions * kTurns / 2);
  CHECK(counts[b.url()] == kSessions * kTurns / 2);
}

TEST_CASE("admin routes") {
  ReplayScript script;
  script.set("d", 0, Task::kRg, "hello");
  ReplayServer replay(script);
  replay.start();
  ModelGateway gw(fast_options());
  httplib::Server admin;
  mount_admin_routes(admin, gw);
  const int port = admin.bind_to_any_port("127.0.0.1");
  std::thread t([&] { admin.listen_after_bind(); });
  admin.wait_until_ready();

  httplib::Client c("127.0.0.1", port);
  CHECK(c.Get("/healthz")->status == 200);
  const json body = {{"id", "rg"}, {"task", "rg"}, {"mode", "structured"}, {"instances", {replay.url()}}};
  auto created = c.Post("/v1/backends", body.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(c.Post("/v1/backends", body.dump(), "application/json")->status == 409);
  CHECK(c.Post("/v1/backends", "{", "application/json")->status == 400);
  auto list = json::parse(c.Get("/v1/backends")->body).at("backends");
  REQUIRE(list.size() == 1);
  CHECK(list[0]["id"] == "rg");

  admin.stop();
  t.join();
}
