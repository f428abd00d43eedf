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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dialight/core/types.hpp"

namespace dialight::eval {

// Splits on Unicode white space and emits every punctuation or symbol code
// point as its own token. "[value_<slot>]" placeholders stay whole. The same
// rules apply to every language.
std::vector<std::string> tokenize(std::string_view text);

// Percentage of turns whose predicted state equals the gold state, values
// compared after casefolding and whitespace collapse.
double joint_goal_accuracy(const std::vector<DialogueState>& predicted,
                           const std::vector<DialogueState>& gold);

struct SlotPrf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Micro-averaged over (domain, slot, value) triples, in percent. Precision is
// 0 when nothing was predicted.
SlotPrf slot_prf(const std::vector<DialogueState>& predicted, const std::vector<DialogueState>& gold);

struct SlotCounts {
  size_t true_positive = 0;
  size_t predicted = 0;
  size_t gold = 0;
};
SlotCounts slot_counts(const DialogueState& predicted, const DialogueState& gold);
SlotPrf slot_prf_from_counts(const SlotCounts& c);
bool states_match(const DialogueState& predicted, const DialogueState& gold);

// Sufficient statistics of corpus BLEU-4; sums of these are exact.
struct BleuStats {
  std::array<size_t, 4> matches{};
  std::array<size_t, 4> totals{};
  size_t hyp_length = 0;
  size_t ref_length = 0;

  void add(const std::vector<std::string>& hyp, const std::vector<std::vector<std::string>>& refs);
  BleuStats& operator+=(const BleuStats& o);
  // Uniform weights, brevity penalty, no smoothing; in [0, 100].
  double score() const;
};

// Throws ValidationError on an empty corpus, mismatched lengths or a
// hypothesis without references.
double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::vector<std::string>>& references);
double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references);

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// LCS-based F1 over tokens, in [0, 1].
double rouge_l(std::string_view hypothesis, std::string_view reference);
double rouge_l_tokens(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

// Exact-match METEOR. The alignment pairs the k-th occurrence of a word in the
// hypothesis with its k-th occurrence in the reference.
double meteor(std::string_view hypothesis, std::string_view reference, const MeteorParams& p = {});
double meteor_tokens(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                     const MeteorParams& p = {});

}  // namespace dialight::eval
