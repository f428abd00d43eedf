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

// Prints one PASS/FAIL line per primary acceptance criterion and exits
// non-zero when any criterion fails.
//
// Optional real-data inputs:
//   DIALIGHT_MULTI3WOZ_DIR   <dir>/<Language>/data.json (+ testListFile.txt),
//                            <dir>/ontology.json, <dir>/db or <dir>/<Language>/db
//   DIALIGHT_PREDICTIONS_DIR <dir>/<lang>.json replay scripts with model outputs
// Without them the ground-truth and oracle criteria run on the bundled
// fixtures and say so.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "dialight/codec/state_codec.hpp"
#include "dialight/core/dataset.hpp"
#include "dialight/db/levenshtein.hpp"
#include "dialight/eval/harness.hpp"
#include "dialight/eval/metrics.hpp"
#include "dialight/gateway/gateway.hpp"
#include "dialight/gateway/replay.hpp"
#include "dialight/orchestrator/orchestrator.hpp"
#include "dialight/realization/realization.hpp"
#include "humaneval_fixture.hpp"
#include "oracles.hpp"

using namespace dialight;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path data(const std::string& name) { return fs::path(DIALIGHT_TEST_DATA) / name; }

const Dataset& fixture() {
  static const Dataset d = load_dataset(data("gold_corpus.json"), data("ontology.json"));
  return d;
}

const db::Database& fixture_db() {
  static const db::Database d = db::load_database_dir(data("db"));
  return d;
}

std::optional<fs::path> env_dir(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

const std::vector<std::pair<std::string, std::string>> kLanguages = {
    {"eng", "English"}, {"ara", "Arabic"}, {"fra", "French"}, {"tur", "Turkish"}};

struct LanguageData {
  Dataset dataset;
  db::Database database;
};

LanguageData load_language(const fs::path& root, const std::string& tag, const std::string& name) {
  LoadOptions options;
  options.language = tag;
  options.split = "test";
  const fs::path dir = root / name;
  LanguageData out{load_dataset(dir / "data.json", root / "ontology.json", options), {}};
  if (fs::exists(dir / "testListFile.txt")) {
    std::set<std::string> keep;
    std::ifstream in(dir / "testListFile.txt");
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) keep.insert(line);
    }
    auto& dialogues = out.dataset.corpus.dialogues;
    for (auto it = dialogues.begin(); it != dialogues.end();) {
      it = keep.count(it->first) ? std::next(it) : dialogues.erase(it);
    }
  }
  out.database = db::load_database_dir(fs::exists(dir / "db") ? dir / "db" : root / "db");
  return out;
}

// Criterion: gold annotations score like the reference evaluation.
Verdict ground_truth() {
  const auto root = env_dir("DIALIGHT_MULTI3WOZ_DIR");
  if (!root) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = eval::evaluate_run(fixture().corpus, fixture().ontology, fixture_db(), nullptr,
                                      eval::EvalMode::kGoldGold);
    const bool ok = r.inform_rate == 100.0 && r.success_rate == 80.0 && r.jga == 100.0;
    return {ok, "degraded to fixtures (DIALIGHT_MULTI3WOZ_DIR unset): " +
                    fmt("inform %.1f success %.1f, hand-derived 100.0/80.0, %.2fs", r.inform_rate,
                        r.success_rate, seconds_since(t0))};
  }
  double inform = 0, success = 0, slowest = 0;
  std::string per_language;
  for (const auto& [tag, name] : kLanguages) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lang = load_language(*root, tag, name);
    eval::EvalConfig config;
    config.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto r = eval::evaluate_run(lang.dataset.corpus, lang.dataset.ontology, lang.database, nullptr,
                                      eval::EvalMode::kGoldGold, config);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    inform += r.inform_rate / kLanguages.size();
    success += r.success_rate / kLanguages.size();
    per_language += fmt(" %.1f/%.1f", r.inform_rate, r.success_rate);
    per_language += " (" + tag + ")";
  }
  const bool ok = std::abs(inform - 89.3) <= 2.0 && std::abs(success - 68.6) <= 2.0 && slowest < 300;
  return {ok, fmt("mean inform %.2f (89.3±2.0) success %.2f (68.6±2.0), slowest language %.1fs;", inform,
                  success, slowest) +
                  per_language};
}

// Criterion: the oracle-RG setting scores at least as well as oracle-DST.
Verdict oracle_ordering() {
  const auto root = env_dir("DIALIGHT_MULTI3WOZ_DIR");
  const auto predictions = env_dir("DIALIGHT_PREDICTIONS_DIR");
  if (!root || !predictions) {
    const auto script = gateway::ReplayScript::load(data("predictions.json"));
    const auto dst = eval::evaluate_run(fixture().corpus, fixture().ontology, fixture_db(), &script,
                                        eval::EvalMode::kOracleDst);
    const auto rg = eval::evaluate_run(fixture().corpus, fixture().ontology, fixture_db(), &script,
                                       eval::EvalMode::kOracleRg);
    const bool ordered = rg.inform_rate >= dst.inform_rate && rg.success_rate >= dst.success_rate;
    const bool exact = dst.inform_rate == 60 && dst.success_rate == 40 && rg.inform_rate == 80 &&
                       rg.success_rate == 60;
    return {ordered && exact,
            "degraded to fixtures (prediction files not supplied): " +
                fmt("oracle_rg %.1f/%.1f >= oracle_dst %.1f/%.1f, hand-derived 80/60 and 60/40", rg.inform_rate,
                    rg.success_rate, dst.inform_rate, dst.success_rate)};
  }
  double dst_i = 0, dst_s = 0, rg_i = 0, rg_s = 0;
  for (const auto& [tag, name] : kLanguages) {
    const auto lang = load_language(*root, tag, name);
    const auto script = gateway::ReplayScript::load(*predictions / (tag + ".json"));
    eval::EvalConfig config;
    config.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto dst = eval::evaluate_run(lang.dataset.corpus, lang.dataset.ontology, lang.database, &script,
                                        eval::EvalMode::kOracleDst, config);
    const auto rg = eval::evaluate_run(lang.dataset.corpus, lang.dataset.ontology, lang.database, &script,
                                       eval::EvalMode::kOracleRg, config);
    dst_i += dst.inform_rate / 4;
    dst_s += dst.success_rate / 4;
    rg_i += rg.inform_rate / 4;
    rg_s += rg.success_rate / 4;
  }
  const bool ok = rg_i >= dst_i && rg_s >= dst_s && std::abs(rg_i - 85.1) <= 2 && std::abs(rg_s - 66.1) <= 2 &&
                  std::abs(dst_i - 72.1) <= 2 && std::abs(dst_s - 43.3) <= 2;
  return {ok, fmt("oracle_rg %.2f/%.2f (85.1/66.1±2.0), ", rg_i, rg_s) +
                  fmt("oracle_dst %.2f/%.2f (72.1/43.3±2.0)", dst_i, dst_s)};
}

// Criterion: each metric agrees with a brute-force oracle.
Verdict metric_oracles() {
  using testing::Tokens;
  const auto t0 = std::chrono::steady_clock::now();
  size_t bad_bleu = 0, bad_rouge = 0, bad_meteor = 0, bad_lev = 0;
  std::mt19937 rng(4242);
  for (int i = 0; i < 200; ++i) {
    std::vector<Tokens> hyps, refs;
    std::vector<std::string> h_text, r_text;
    for (int s = 0, n = 1 + rng() % 3; s < n; ++s) {
      hyps.push_back(testing::random_sentence(rng, 10, 4));
      refs.push_back(testing::random_sentence(rng, 10, 4));
      h_text.push_back(testing::join(hyps.back()));
      r_text.push_back(testing::join(refs.back()));
    }
    bad_bleu += std::abs(eval::corpus_bleu(h_text, r_text) - testing::oracle_bleu(hyps, refs)) >= 1e-6;
  }
  for (int i = 0; i < 200; ++i) {
    const auto h = testing::random_sentence(rng, 10, 4);
    const auto r = testing::random_sentence(rng, 10, 4);
    bad_rouge += eval::lcs_length(h, r) != testing::oracle_lcs(h, r) ||
                 eval::rouge_l_tokens(h, r) != testing::oracle_rouge(h, r);
  }
  for (int i = 0; i < 200; ++i) {
    const auto h = testing::random_unique_sentence(rng, 7, 8);
    const auto r = testing::random_unique_sentence(rng, 7, 8);
    const auto scores = testing::oracle_meteor_scores(h, r);
    bad_meteor += scores.size() != 1 || std::abs(eval::meteor_tokens(h, r) - scores[0]) >= 1e-6;
  }
  for (int i = 0; i < 200; ++i) {
    const auto h = testing::random_sentence(rng, 7, 3);
    const auto r = testing::random_sentence(rng, 7, 3);
    const double ours = eval::meteor_tokens(h, r);
    bool found = false;
    for (double s : testing::oracle_meteor_scores(h, r)) found = found || std::abs(s - ours) < 1e-6;
    bad_meteor += !found;
  }
  const std::u32string alphabet = U"abcéü日ب";
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_string(rng, 12, alphabet);
    const auto b = testing::random_string(rng, 12, alphabet);
    bad_lev += db::levenshtein(a, b) != testing::oracle_distance(a, b);
  }
  // Identity and disjoint cases.
  const std::vector<std::string> same = {"the hotel is in the north of town"};
  const std::vector<std::string> other = {"xa xb xc xd"};
  const bool edges = eval::corpus_bleu(same, same) == 100.0 && eval::corpus_bleu(other, same) == 0.0 &&
                     eval::rouge_l(same[0], same[0]) == 1.0 && eval::rouge_l(other[0], same[0]) == 0.0 &&
                     eval::meteor(other[0], same[0]) == 0.0 && db::levenshtein(same[0], same[0]) == 0 &&
                     db::levenshtein("abc", "xyz") == 3;
  const double secs = seconds_since(t0);
  const bool ok = bad_bleu + bad_rouge + bad_meteor + bad_lev == 0 && edges && secs < 30;
  std::ostringstream d;
  d << "mismatches bleu " << bad_bleu << "/200, rouge " << bad_rouge << "/200, meteor " << bad_meteor
    << "/400, levenshtein " << bad_lev << "/200; edge cases " << (edges ? "ok" : "wrong") << "; "
    << fmt("%.2fs (< 30s)", secs);
  return {ok, d.str()};
}

// Criterion: the state grammar round-trips and the documented strings hold.
Verdict codec_round_trip() {
  const Ontology& ontology = fixture().ontology;
  size_t mismatches = 0;
  std::mt19937 rng(20240611);
  for (int i = 0; i < 10000; ++i) {
    const DialogueState s = testing::random_state(rng, ontology);
    const auto back = codec::parse_linearized_state(codec::linearize_state(s), ontology);
    mismatches += !(back.state == s) || !back.compliant;
  }
  const std::string line = "taxi # departure = saint johns college ; destination = pizza hut fenditton";
  const DialogueState taxi{{"taxi", "departure", "saint johns college"},
                           {"taxi", "destination", "pizza hut fenditton"}};
  const bool linearized = codec::linearize_state(taxi) == line;
  const auto parsed = codec::parse_linearized_state(line, ontology);
  const bool parsed_ok = parsed.compliant && parsed.state == taxi;
  const bool valid_cheap = validate_state(DialogueState{{"hotel", "pricerange", "cheap"}}, ontology).empty();
  std::ostringstream d;
  d << mismatches << "/10000 round-trip mismatches; linearize example " << (linearized ? "exact" : "differs")
    << ", parse example " << (parsed_ok ? "exact" : "differs") << ", categorical example "
    << (valid_cheap ? "valid" : "rejected");
  return {mismatches == 0 && linearized && parsed_ok && valid_cheap, d.str()};
}

gateway::GatewayOptions fast_options() {
  gateway::GatewayOptions o;
  o.timeout = std::chrono::milliseconds(5000);
  o.probe_timeout = std::chrono::milliseconds(500);
  return o;
}

// Criterion: replayed gold outputs reproduce the hand-derived traces.
Verdict trace_fidelity() {
  using gateway::Mode;
  using gateway::Task;
  gateway::ReplayServer replay(gateway::ReplayScript::from_gold(fixture().corpus));
  replay.start();
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, Mode::kStructured, {replay.url()}});
  gw.register_backend({"rg", Task::kRg, Mode::kStructured, {replay.url()}});
  auto resources = std::make_shared<orchestrator::PipelineResources>();
  resources->ontology = fixture().ontology;
  resources->database = fixture_db();
  resources->placeholders = realization::placeholder_inventory(fixture().corpus);
  orchestrator::Orchestrator orch(resources, gw);

  const json expected = read_json_file(data("expected_trace.json"));
  size_t turns = 0, wrong = 0;
  std::string first_wrong;
  for (const auto& [id, dialogue] : fixture().corpus.dialogues) {
    orchestrator::SystemConfig config;
    config.dst_backend = "dst";
    config.rg_backend = "rg";
    config.dialogue_tag = id;
    const std::string session = orch.create_session(config);
    const json& want = expected.at(id);
    for (size_t t = 0; t < dialogue.turns.size(); ++t) {
      const auto trace = orch.process_user_turn(session, dialogue.turns[t].user.text);
      const json& w = want.at(t);
      const std::optional<std::string> active =
          w.at("active_domain").is_null() ? std::nullopt
                                          : std::optional<std::string>(w.at("active_domain").get<std::string>());
      const bool same = trace.state == state_from_json(w.at("state")) &&
                        trace.counts == w.at("counts").get<std::map<std::string, size_t>>() &&
                        trace.db_summary == w.at("db_summary").get<std::string>() &&
                        trace.active_domain == active && trace.lexicalized == w.at("response").get<std::string>();
      ++turns;
      if (!same) {
        ++wrong;
        if (first_wrong.empty()) first_wrong = ", first difference at " + id + " turn " + std::to_string(t);
      }
    }
  }
  const bool ok = wrong == 0 && turns == fixture().corpus.turn_count();
  return {ok, std::to_string(turns - wrong) + "/" + std::to_string(turns) + " turns identical" + first_wrong};
}

// Criterion: interleaved sessions stay isolated and instances share load evenly.
Verdict gateway_statelessness() {
  using gateway::Task;
  constexpr int kSessions = 32;
  constexpr size_t kTurns = 6;
  gateway::ReplayScript script;
  for (int s = 0; s < kSessions; ++s) {
    for (size_t t = 0; t < kTurns; ++t) {
      script.set("dlg" + std::to_string(s), t, Task::kDst, "out-" + std::to_string(s) + "-" + std::to_string(t));
    }
  }
  gateway::ReplayServer a(script), b(script);
  a.start();
  b.start();
  gateway::ModelGateway gw(fast_options());
  gw.register_backend({"dst", Task::kDst, gateway::Mode::kStructured, {a.url(), b.url()}});

  std::vector<std::vector<std::string>> got(kSessions);
  std::vector<std::thread> threads;
  std::atomic<int> errors{0};
  for (int s = 0; s < kSessions; ++s) {
    threads.emplace_back([&, s] {
      for (size_t t = 0; t < kTurns; ++t) {
        gateway::InferenceRequest r;
        r.backend_id = "dst";
        r.task = Task::kDst;
        r.session_id = "session-" + std::to_string(s);
        r.payload.history = {{Speaker::kUser, "hello"}};
        r.payload.dialogue_id = "dlg" + std::to_string(s);
        r.payload.turn = t;
        try {
          got[s].push_back(gw.route(r).output);
        } catch (const std::exception&) {
          ++errors;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  size_t leaks = 0;
  for (int s = 0; s < kSessions; ++s) {
    for (size_t t = 0; t < got[s].size(); ++t) {
      leaks += got[s][t] != "out-" + std::to_string(s) + "-" + std::to_string(t);
    }
  }
  auto counts = gw.served_counts("dst");
  const size_t half = kSessions * kTurns / 2;
  const bool ok = errors == 0 && leaks == 0 && counts[a.url()] == half && counts[b.url()] == half;
  std::ostringstream d;
  d << kSessions << " sessions x " << kTurns << " turns: " << leaks << " cross-session outputs, " << errors
    << " errors, instance counts " << counts[a.url()] << "/" << counts[b.url()] << " (expected " << half << "/"
    << half << ")";
  return {ok, d.str()};
}

// Criterion: the evaluation service enforces auth and aggregates exactly.
Verdict security_suite() {
  const auto problems = testing::security_violations();
  std::ostringstream d;
  d << problems.size() << " auth/role violations";
  if (!problems.empty()) d << " (first: " << problems.front() << ")";

  testing::ServiceUnderTest sut;
  auto no_consent = sut.call("POST", "/auth/register", "", R"({"username":"x","password":"long-enough"})");
  const bool consent_rejected = no_consent && no_consent->status == 422 && !sut.store.account("x");
  d << "; consent-less registration " << (consent_rejected ? "rejected" : "accepted");

  // Seeded pilot: 10 participants, 2 systems x 2 dialogues each.
  sut.service.provision_admin("admin", "admin-password");
  std::mt19937 rng(5);
  for (int u = 0; u < 10; ++u) {
    const std::string id = "pilot" + std::to_string(u);
    sut.service.register_participant(id, "password-p", true);
    const auto claims = sut.service.authenticate(sut.login_token(id, "password-p"));
    while (auto a = sut.service.next_task(claims)) {
      sut.service.submit_feedback(claims, {{"session_id", a->session_id},
                                           {"question_id", "overall"},
                                           {"answer", 1 + static_cast<int>(rng() % 5)}});
    }
  }
  const auto admin = sut.service.authenticate(sut.login_token("admin", "admin-password"));
  const auto exported = sut.service.export_submissions(admin, std::nullopt);
  bool aggregates_exact = exported["feedback"].size() == 40;
  const std::regex shape(R"(^\d+\.\d ± \d+\.\d$)");
  std::string rendered;
  for (const char* system : {"system-a", "system-b"}) {
    std::vector<double> v;
    for (const auto& f : exported["feedback"]) {
      if (f["system_label"] == system) v.push_back(f["answer"].get<double>());
    }
    double mean = 0, var = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    const double stddev = std::sqrt(var / v.size());
    const auto agg = sut.service.aggregate(admin, system, "overall");
    aggregates_exact = aggregates_exact && agg.n == v.size() && std::abs(agg.mean - mean) < 1e-12 &&
                       std::abs(agg.stddev - stddev) < 1e-12 && std::regex_match(agg.formatted(), shape) &&
                       agg.formatted() == fmt("%.1f ± %.1f", mean, stddev);
    rendered += std::string(rendered.empty() ? "" : ", ") + system + " " + agg.formatted();
  }
  const bool reference_format = humaneval::Aggregate{3.75, 0.4330127018922193, 4}.formatted() == "3.8 ± 0.4";
  d << "; pilot aggregates " << (aggregates_exact ? "match brute force" : "differ") << " (" << rendered
    << "); {4,4,3,4} renders " << humaneval::Aggregate{3.75, 0.4330127018922193, 4}.formatted();
  return {problems.empty() && consent_rejected && aggregates_exact && reference_format, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"ground-truth Inform/Success reproduction", ground_truth},
      {"oracle-substitution ordering", oracle_ordering},
      {"metric oracles", metric_oracles},
      {"codec round-trip", codec_round_trip},
      {"pipeline trace fidelity", trace_fidelity},
      {"gateway statelessness and fairness", gateway_statelessness},
      {"service security suite", security_suite},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
