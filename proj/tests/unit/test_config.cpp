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

#include <cstdlib>

#include "dialight/config/deployment.hpp"
#include "dialight/core/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dialight;
using namespace dialight::config;
using nlohmann::json;

namespace {

json sample() {
  return json::parse(R"({
    "data": {"ontology": "ontology.json", "db_dir": "db"},
    "database": {
      "threshold": 1,
      "aliases": {"train": {"train id": "id"}},
      "slot_match": {"train": {"leave at": "at_or_after"}}
    },
    "summaries": {"summary.fra": "{domain} a {count}"},
    "gateway": {
      "port": 9100, "timeout_ms": 5000,
      "backends": [{"id": "dst", "task": "dst", "instances": ["http://127.0.0.1:9"]},
                   {"id": "rg", "task": "rg", "endpoint": "http://127.0.0.1:10"}]
    },
    "systems": {"system-a": {"dst_backend": "dst", "rg_backend": "rg", "language": "fra", "context_window": 4}},
    "humaneval": {
      "port": 9200,
      "token_secret": {"env": "DIALIGHT_TEST_TOKEN_SECRET"},
      "password_iterations": 1000,
      "storage_path": "store/humaneval.log",
      "admins": [{"username": "root", "password": "root-password"}],
      "tasks": [{"task_id": "t1", "system_label": "system-a", "scenario": {"goal": "x"}}]
    }
  })");
}

}  // namespace

TEST_CASE("deployment config parses every section") {
  ::setenv("DIALIGHT_TEST_TOKEN_SECRET", "from-the-environment-1234", 1);
  const auto c = parse_deployment_config(sample(), "/srv/conf");
  CHECK(c.ontology == "/srv/conf/ontology.json");
  CHECK(c.db_dir == "/srv/conf/db");
  CHECK_FALSE(c.icl_pool.has_value());
  CHECK(c.match.threshold == 1);
  CHECK(c.match.attribute_for("train", "train id") == "id");
  CHECK(c.match.slot_match.at("train").at("leave at") == db::slot_match_from_string("at_or_after"));
  CHECK(c.summaries.has("fra"));
  CHECK(c.gateway_listen.port == 9100);
  CHECK(c.gateway_options.timeout == std::chrono::milliseconds(5000));
  REQUIRE(c.backends.size() == 2);
  CHECK(c.backends[1].instances == std::vector<std::string>{"http://127.0.0.1:10"});
  CHECK(c.systems.count("system-a"));
  CHECK(c.humaneval_listen.port == 9200);
  CHECK(c.service.token_secret == "from-the-environment-1234");
  CHECK(c.storage_path == "/srv/conf/store/humaneval.log");
  REQUIRE(c.admins.size() == 1);
  CHECK(c.admins[0].username == "root");
  REQUIRE(c.tasks.size() == 1);
  CHECK(c.tasks[0].dialogues_per_participant == 2);
}

TEST_CASE("deployment config errors") {
  ::unsetenv("DIALIGHT_TEST_TOKEN_SECRET");
  CHECK_THROWS_AS(parse_deployment_config(sample(), "/"), ValidationError);
  ::setenv("DIALIGHT_TEST_TOKEN_SECRET", "from-the-environment-1234", 1);

  auto unknown_system = sample();
  unknown_system["humaneval"]["tasks"][0]["system_label"] = "system-z";
  CHECK_THROWS_AS(parse_deployment_config(unknown_system, "/"), ValidationError);

  auto no_data = sample();
  no_data.erase("data");
  CHECK_THROWS_AS(parse_deployment_config(no_data, "/"), ParseError);

  auto bad_window = sample();
  bad_window["systems"]["system-a"]["context_window"] = 0;
  CHECK_THROWS_AS(parse_deployment_config(bad_window, "/"), ValidationError);

  auto bad_mode = sample();
  bad_mode["database"]["slot_match"]["train"]["leave at"] = "sideways";
  CHECK_THROWS(parse_deployment_config(bad_mode, "/"));
}

TEST_CASE("resources load from the fixture tree") {
  ::setenv("DIALIGHT_TEST_TOKEN_SECRET", "from-the-environment-1234", 1);
  const auto c = parse_deployment_config(sample(), testing::data_dir());
  const auto r = build_resources(c);
  CHECK(r->database.has_domain("restaurant"));
  CHECK_FALSE(r->icl_pool.has_value());
  CHECK(r->placeholders.count("[value_area]"));
  CHECK(load_questionnaire(c).find("overall") != nullptr);
}
