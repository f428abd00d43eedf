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

// Corpus evaluation: JGA, slot P/R/F1, BLEU, ROUGE-L, METEOR, Inform, Success.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dialight/config/deployment.hpp"
#include "dialight/core/dataset.hpp"
#include "dialight/eval/harness.hpp"

using namespace dialight;

int main(int argc, char** argv) {
  CLI::App app{"Evaluate replayed predictions against a gold corpus"};
  std::string corpus_path, ontology_path, db_dir, predictions_path, mode_name = "e2e", language = "eng",
                                                                   out_path, match_path,
                                                                   dst_format = "auto";
  std::optional<size_t> threshold;
  size_t workers = 1;
  bool per_dialogue = false;
  app.add_option("--corpus", corpus_path, "Gold corpus (fixture or MultiWOZ-style JSON)")->required();
  app.add_option("--ontology", ontology_path, "Ontology JSON")->required();
  app.add_option("--db-dir", db_dir, "Directory of <domain>_db.json files")->required();
  app.add_option("--predictions", predictions_path, "Replay-script JSON with model outputs");
  app.add_option("--mode", mode_name, "e2e | oracle-dst | oracle-rg | gold-gold")
      ->check(CLI::IsMember({"e2e", "oracle-dst", "oracle-rg", "gold-gold", "oracle_dst", "oracle_rg",
                             "gold_gold"}));
  app.add_option("--language", language, "Language tag of the corpus");
  app.add_option("--out", out_path, "Write the JSON report here");
  app.add_option("--match", match_path, "JSON with threshold, dontcare, aliases, slot_match");
  app.add_option("--threshold", threshold, "Levenshtein threshold for non-categorical slots");
  app.add_option("--workers", workers, "Evaluate dialogues on this many threads")->check(CLI::PositiveNumber);
  app.add_option("--dst-format", dst_format, "auto | linearized | json")
      ->check(CLI::IsMember({"auto", "linearized", "json"}));
  app.add_flag("--per-dialogue", per_dialogue, "Include per-dialogue Inform/Success in the report");
  CLI11_PARSE(app, argc, argv);

  try {
    LoadOptions options;
    options.language = language;
    const auto dataset = load_dataset(corpus_path, ontology_path, options);
    for (const auto& w : dataset.warnings) std::cerr << "warning: " << w.where << ": " << w.message << "\n";
    const auto database = db::load_database_dir(db_dir);

    eval::EvalConfig config;
    if (!match_path.empty()) config.match = config::match_options_from_json(read_json_file(match_path));
    if (threshold) config.match.threshold = *threshold;
    config.workers = workers;
    config.dst_format = eval::dst_format_from_string(dst_format);

    const auto mode = eval::eval_mode_from_string(mode_name);
    std::optional<gateway::ReplayScript> predictions;
    if (!predictions_path.empty()) predictions = gateway::ReplayScript::load(predictions_path);
    auto report = eval::evaluate_run(dataset.corpus, dataset.ontology, database,
                                     predictions ? &*predictions : nullptr, mode, config);
    report.language = language;
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    const std::string json_text = eval::to_json(report, per_dialogue).dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << json_text;
    } else {
      std::ofstream(out_path) << json_text;
    }
    std::cerr << eval::render_table({report});
    return 0;
  } catch (const eval::CoverageError& e) {
    std::cerr << "coverage gap: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
