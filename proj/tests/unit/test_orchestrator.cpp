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
#include "dialight/gateway/replay.hpp"
#include "dialight/orchestrator/orchestrator.hpp"
#include "doctest.h"
#include "httplib.h"
#include "test_support.hpp"

using namespace dialight;
using namespace dialight::orchestrator;
using gateway::Mode;
using gateway::Task;
using nlohmann::json;

namespace {

const Dataset& dataset() {
  static const Dataset d = load_dataset(testing::data("gold_corpus.json"), testing::data("ontology.json"));
  return d;
}

std::shared_ptr<PipelineResources> resources() {
  auto r = std::make_shared<PipelineResources>();
  r->ontology = dataset().ontology;
  r->database = db::load_database_dir(testing::data("db"));
  r->placeholders = realization::placeholder_inventory(dataset().corpus);
  return r;
}

gateway::GatewayOptions fast_options() {
  gateway::GatewayOptions o;
  o.timeout = std::chrono::milliseconds(5000);
  o.probe_timeout = std::chrono::milliseconds(500);
  return o;
}

// Answers /v1/infer with fixed outputs and keeps every request body.
class RecordingServer {
 public:
  RecordingServer(std::string dst_output, std::string rg_output)
      : dst_(std::move(dst_output)), rg_(std::move(rg_output)) {
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    server_.Post("/v1/infer", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      std::lock_guard lock(mu_);
      requests_.push_back(body);
      if (fail_rg_ && body["task"] == "rg") {
        res.status = 500;
        res.set_content(R"({"error":"boom"})", "application/json");
        return;
      }
      res.set_content(json{{"output", body["task"] == "dst" ? dst_ : rg_}, {"request_id", body["request_id"]}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~RecordingServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::vector<json> requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  void set_dst(std::string s) {
    std::lock_guard lock(mu_);
    dst_ = std::move(s);
  }
  void fail_rg(bool f) {
    std::lock_guard lock(mu_);
    fail_rg_ = f;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<json> requests_;
  std::string dst_, rg_;
  bool fail_rg_ = false;
};

SystemConfig config_for(const std::string& dst, const std::string& rg) {
  SystemConfig c;
  c.dst_backend = dst;
  c.rg_backend = rg;
  return c;
}

}  // namespace

TEST_CASE("oracle replay reproduces the hand-traced pipeline") {
  gateway::ReplayServer replay(gateway::ReplayScript::from_gold(dataset().corpus));
  replay.start();
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {replay.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {replay.url()}});
  Orchestrator orch(resources(), gw);

  const json expected = read_json_file(testing::data("expected_trace.json"));
  size_t turns = 0;
  for (const auto& [id, dialogue] : dataset().corpus.dialogues) {
    SystemConfig config = config_for("dst", "rg");
    config.dialogue_tag = id;
    const std::string session = orch.create_session(config);
    const json& want = expected.at(id);
    REQUIRE(want.size() == dialogue.turns.size());
    for (size_t t = 0; t < dialogue.turns.size(); ++t) {
      CAPTURE(id);
      CAPTURE(t);
      const TurnTrace trace = orch.process_user_turn(session, dialogue.turns[t].user.text);
      const json& w = want[t];
      CHECK(trace.state == state_from_json(w.at("state")));
      CHECK(trace.counts == w.at("counts").get<std::map<std::string, size_t>>());
      CHECK(trace.db_summary == w.at("db_summary").get<std::string>());
      if (w.at("active_domain").is_null()) {
        CHECK_FALSE(trace.active_domain.has_value());
      } else {
        CHECK(trace.active_domain == w.at("active_domain").get<std::string>());
      }
      CHECK(trace.lexicalized == w.at("response").get<std::string>());
      CHECK(trace.parse.compliant);
      ++turns;
    }
    CHECK(orch.history(session).size() == 2 * dialogue.turns.size());
  }
  CHECK(turns == 11);
}

TEST_CASE("every stage is recorded") {
  RecordingServer model("hotel # area = north", "[value_name] is nice .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  const auto s = orch.create_session(config_for("dst", "rg"));
  const auto t = orch.process_user_turn(s, "a hotel in the north please");
  CHECK(t.raw_dst == "hotel # area = north");
  CHECK(t.parse.state.size() == 1);
  CHECK(t.counts.at("hotel") == 1);
  CHECK(t.db_summary == "hotel has one result found");
  CHECK(t.raw_rg == "[value_name] is nice .");
  CHECK(t.delex.placeholders.size() == 1);
  CHECK(t.lexicalized == "acorn guest house is nice .");
  CHECK_FALSE(t.dst_instance.empty());
  CHECK_FALSE(t.rg_instance.empty());
  CHECK(t.total_ms >= t.dst_ms);

  const json j = to_json(t);
  for (const char* key : {"raw_dst", "parse", "counts", "db_summary", "raw_rg", "delex", "response"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  // structured payloads carry the summary for RG and no prompt
  auto reqs = model.requests();
  REQUIRE(reqs.size() == 2);
  CHECK_FALSE(reqs[0]["payload"].contains("prompt"));
  CHECK(reqs[1]["payload"]["db_summary"] == "hotel has one result found");
}

TEST_CASE("garbage DST output carries the state forward") {
  RecordingServer model("hotel # area = north", "ok .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  const auto s = orch.create_session(config_for("dst", "rg"));
  orch.process_user_turn(s, "north please");
  model.set_dst("garbage output");
  const auto t = orch.process_user_turn(s, "and then ?");
  CHECK(t.carried_forward);
  CHECK_FALSE(t.parse.compliant);
  CHECK(t.state == DialogueState{{"hotel", "area", "north"}});
  CHECK(orch.state(s) == DialogueState{{"hotel", "area", "north"}});
}

TEST_CASE("accumulated state equals a re-merge of the turn log") {
  RecordingServer model("", "ok .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  const auto s = orch.create_session(config_for("dst", "rg"));
  const std::vector<std::string> outputs = {
      "hotel # area = north",        "hotel # area = centre ; pricerange = cheap",
      "nonsense",                    "taxi # leaveat = 10:15 | hotel # stars = 4",
      "hotel#type=guesthouse",       "",
      "restaurant # food = indian",  "hotel # area = north"};
  for (const auto& o : outputs) {
    model.set_dst(o);
    orch.process_user_turn(s, "next");
  }
  DialogueState replayed;
  for (const auto& t : orch.traces(s)) {
    if (!t.carried_forward) {
      for (const auto& [key, value] : t.parse.state.entries()) replayed.set(key.first, key.second, value);
    }
    CHECK(t.state == replayed);
  }
  CHECK(orch.state(s) == replayed);
  CHECK(replayed.get("hotel", "pricerange") == "cheap");
  CHECK(replayed.get("hotel", "area") == "north");
}

TEST_CASE("payload history is limited to the context window") {
  RecordingServer model("", "ok .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  const auto s = orch.create_session(config_for("dst", "rg"));
  for (int i = 0; i < 6; ++i) orch.process_user_turn(s, "turn " + std::to_string(i));
  CHECK(orch.history(s).size() == 12);
  orch.process_user_turn(s, "turn 6");
  const auto reqs = model.requests();
  const json& last_dst = reqs[reqs.size() - 2];
  CHECK(last_dst["task"] == "dst");
  const json& history = last_dst["payload"]["history"];
  REQUIRE(history.size() == 10);
  CHECK(history.back()["text"] == "turn 6");
  CHECK(history.front()["speaker"] == "system");
  CHECK(history[1]["text"] == "turn 2");
  CHECK(last_dst["payload"]["turn"] == 6);
}

TEST_CASE("a failed turn leaves the session untouched") {
  RecordingServer model("hotel # area = north", "ok .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  const auto s = orch.create_session(config_for("dst", "rg"));
  orch.process_user_turn(s, "first");
  const auto history = orch.history(s);
  const auto state = orch.state(s);
  const auto traces = orch.traces(s).size();

  model.set_dst("hotel # area = centre");
  model.fail_rg(true);
  CHECK_THROWS_AS(orch.process_user_turn(s, "second"), UnavailableError);
  CHECK(orch.history(s) == history);
  CHECK(orch.state(s) == state);
  CHECK(orch.traces(s).size() == traces);
  CHECK_THROWS_AS(orch.process_user_turn(s, "  "), ValidationError);
  CHECK_THROWS_AS(orch.process_user_turn("missing", "hi"), NotFoundError);
}

TEST_CASE("session creation checks backends") {
  RecordingServer model("", "");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {model.url()}});
  Orchestrator orch(resources(), gw);
  CHECK_THROWS_AS(orch.create_session(config_for("nope", "rg")), NotFoundError);
  CHECK_THROWS_AS(orch.create_session(config_for("rg", "rg")), ValidationError);
  SystemConfig icl = config_for("dst", "rg");
  icl.prompt.n_icl_examples = 2;
  CHECK_THROWS_AS(orch.create_session(icl), ValidationError);  // no pool loaded
}

TEST_CASE("prompted backends receive a prompt and JSON output is parsed") {
  RecordingServer model("Sure: {\"hotel\": {\"area\": \"north\"}}", "ok .");
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kPrompted, {model.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kPrompted, {model.url()}});
  auto r = resources();
  r->icl_pool = dataset().corpus;
  Orchestrator orch(r, gw);
  SystemConfig c = config_for("dst", "rg");
  c.prompt.n_icl_examples = 2;
  const auto s = orch.create_session(c);
  const auto t = orch.process_user_turn(s, "north please");
  CHECK(t.parse.compliant);
  CHECK(t.state == DialogueState{{"hotel", "area", "north"}});
  const auto reqs = model.requests();
  REQUIRE(reqs.size() == 2);
  const std::string dst_prompt = reqs[0]["payload"]["prompt"];
  CHECK(dst_prompt.find("### examples") != std::string::npos);
  const std::string rg_prompt = reqs[1]["payload"]["prompt"];
  CHECK(rg_prompt.find("hotel has one result found") != std::string::npos);
}

TEST_CASE("sessions run concurrently") {
  gateway::ReplayServer replay(gateway::ReplayScript::from_gold(dataset().corpus));
  replay.start();
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {replay.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {replay.url()}});
  Orchestrator orch(resources(), gw);
  const json expected = read_json_file(testing::data("expected_trace.json"));

  std::vector<std::thread> threads;
  std::map<std::string, std::vector<std::string>> got;
  std::mutex mu;
  for (int copy = 0; copy < 4; ++copy) {
    for (const auto& [id, dialogue] : dataset().corpus.dialogues) {
      threads.emplace_back([&, id = id, copy] {
        SystemConfig c = config_for("dst", "rg");
        c.dialogue_tag = id;
        const auto s = orch.create_session(c);
        std::vector<std::string> out;
        for (const auto& turn : dataset().corpus.dialogues.at(id).turns) {
          out.push_back(orch.process_user_turn(s, turn.user.text).lexicalized);
        }
        std::lock_guard lock(mu);
        got[id + "#" + std::to_string(copy)] = out;
      });
    }
  }
  for (auto& t : threads) t.join();
  for (const auto& [key, responses] : got) {
    const json& want = expected.at(key.substr(0, key.find('#')));
    for (size_t t = 0; t < responses.size(); ++t) CHECK(responses[t] == want[t].at("response").get<std::string>());
  }
}

TEST_CASE("session routes") {
  gateway::ReplayServer replay(gateway::ReplayScript::from_gold(dataset().corpus));
  replay.start();
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {replay.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {replay.url()}});
  Orchestrator orch(resources(), gw);
  httplib::Server server;
  mount_session_routes(server, orch);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  auto created = c.Post("/v1/sessions", R"({"dst_backend":"dst","rg_backend":"rg","dialogue_tag":"d01"})",
                        "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = json::parse(created->body)["id"];
  auto turn = c.Post(("/v1/sessions/" + id + "/turns").c_str(), R"({"text":"cheap food in the centre"})",
                     "application/json");
  REQUIRE(turn);
  CHECK(turn->status == 200);
  CHECK(json::parse(turn->body)["response"] == "pizza hut city centre is a cheap restaurant in the centre .");
  CHECK(json::parse(c.Get(("/v1/sessions/" + id).c_str())->body)["turns"].size() == 1);
  CHECK(c.Get("/v1/sessions/nope")->status == 404);
  CHECK(c.Post("/v1/sessions", "{", "application/json")->status == 400);
  CHECK(c.Post("/v1/sessions", R"({"dst_backend":"x","rg_backend":"rg"})", "application/json")->status == 422);
  CHECK(c.Post(("/v1/sessions/" + id + "/turns").c_str(), R"({"text":""})", "application/json")->status == 422);

  server.stop();
  th.join();
}
