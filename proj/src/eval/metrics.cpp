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

#include "dialight/eval/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"

namespace dialight::eval {

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  const std::u32string cps = text::decode_utf8(input);
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(text::encode_utf8(current));
    current.clear();
  };
  for (size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (c == U'[') {
      // "[value_" [a-z0-9_]+ "]" is one token.
      static const std::u32string kOpen = U"[value_";
      if (cps.compare(i, kOpen.size(), kOpen) == 0) {
        size_t j = i + kOpen.size();
        while (j < cps.size() && ((cps[j] >= U'a' && cps[j] <= U'z') ||
                                  (cps[j] >= U'0' && cps[j] <= U'9') || cps[j] == U'_')) {
          ++j;
        }
        if (j < cps.size() && cps[j] == U']' && j > i + kOpen.size()) {
          flush();
          out.push_back(text::encode_utf8(std::u32string_view(cps).substr(i, j + 1 - i)));
          i = j;
          continue;
        }
      }
    }
    if (text::is_space(c)) {
      flush();
    } else if (text::is_punct(c)) {
      flush();
      out.push_back(text::encode_utf8(std::u32string(1, c)));
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

namespace {

std::set<StateTriple> normalized(const DialogueState& s) {
  std::set<StateTriple> out;
  for (const auto& t : s.triples()) {
    out.insert({text::normalize(t.domain), text::normalize(t.slot), text::normalize(t.value)});
  }
  return out;
}

void check_lengths(size_t a, size_t b) {
  if (a != b) {
    throw ValidationError("prediction/gold length mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
}

}  // namespace

bool states_match(const DialogueState& predicted, const DialogueState& gold) {
  return normalized(predicted) == normalized(gold);
}

double joint_goal_accuracy(const std::vector<DialogueState>& predicted,
                           const std::vector<DialogueState>& gold) {
  check_lengths(predicted.size(), gold.size());
  if (gold.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < gold.size(); ++i) hits += states_match(predicted[i], gold[i]) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(gold.size());
}

SlotCounts slot_counts(const DialogueState& predicted, const DialogueState& gold) {
  const auto p = normalized(predicted);
  const auto g = normalized(gold);
  SlotCounts c;
  c.predicted = p.size();
  c.gold = g.size();
  for (const auto& t : p) c.true_positive += g.count(t);
  return c;
}

SlotPrf slot_prf_from_counts(const SlotCounts& c) {
  SlotPrf r;
  r.precision = c.predicted ? 100.0 * c.true_positive / c.predicted : 0.0;
  r.recall = c.gold ? 100.0 * c.true_positive / c.gold : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

SlotPrf slot_prf(const std::vector<DialogueState>& predicted, const std::vector<DialogueState>& gold) {
  check_lengths(predicted.size(), gold.size());
  SlotCounts total;
  for (size_t i = 0; i < gold.size(); ++i) {
    const auto c = slot_counts(predicted[i], gold[i]);
    total.true_positive += c.true_positive;
    total.predicted += c.predicted;
    total.gold += c.gold;
  }
  return slot_prf_from_counts(total);
}

void BleuStats::add(const std::vector<std::string>& hyp,
                    const std::vector<std::vector<std::string>>& refs) {
  if (refs.empty()) throw ValidationError("hypothesis without reference");
  for (size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, size_t> hyp_counts;
    for (size_t i = 0; i + n <= hyp.size(); ++i) {
      ++hyp_counts[std::vector<std::string>(hyp.begin() + i, hyp.begin() + i + n)];
    }
    std::map<std::vector<std::string>, size_t> max_ref;
    for (const auto& ref : refs) {
      std::map<std::vector<std::string>, size_t> counts;
      for (size_t i = 0; i + n <= ref.size(); ++i) {
        ++counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + n)];
      }
      for (const auto& [gram, c] : counts) max_ref[gram] = std::max(max_ref[gram], c);
    }
    for (const auto& [gram, c] : hyp_counts) {
      auto it = max_ref.find(gram);
      matches[n - 1] += it == max_ref.end() ? 0 : std::min(c, it->second);
    }
    totals[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  hyp_length += hyp.size();
  // Closest reference length; ties go to the shorter one.
  size_t best = refs.front().size();
  for (const auto& ref : refs) {
    const auto d = [&](size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
    if (d(ref.size()) < d(best) || (d(ref.size()) == d(best) && ref.size() < best)) best = ref.size();
  }
  ref_length += best;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (size_t n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

double BleuStats::score() const {
  double log_sum = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  if (hyp_length == 0) return 0.0;
  const double bp = hyp_length > ref_length
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.empty()) throw ValidationError("BLEU of an empty corpus");
  check_lengths(hypotheses.size(), references.size());
  BleuStats stats;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[i]) refs.push_back(tokenize(r));
    stats.add(tokenize(hypotheses[i]), refs);
  }
  return stats.score();
}

double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back({r});
  return corpus_bleu(hypotheses, refs);
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> row(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = 0;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l_tokens(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  if (lcs == 0) return 0.0;
  const double p = lcs / hyp.size();
  const double r = lcs / ref.size();
  return 2 * p * r / (p + r);
}

double rouge_l(std::string_view hypothesis, std::string_view reference) {
  return rouge_l_tokens(tokenize(hypothesis), tokenize(reference));
}

double meteor_tokens(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                     const MeteorParams& p) {
  if (hyp.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, std::vector<size_t>> positions;
  for (size_t j = 0; j < ref.size(); ++j) positions[ref[j]].push_back(j);
  std::unordered_map<std::string, size_t> used;
  // aligned[i] = reference position of hypothesis token i, or npos.
  std::vector<size_t> aligned(hyp.size(), std::string::npos);
  size_t m = 0;
  for (size_t i = 0; i < hyp.size(); ++i) {
    auto it = positions.find(hyp[i]);
    if (it == positions.end()) continue;
    size_t& k = used[hyp[i]];
    if (k < it->second.size()) {
      aligned[i] = it->second[k++];
      ++m;
    }
  }
  if (m == 0) return 0.0;
  size_t chunks = 0;
  for (size_t i = 0; i < hyp.size(); ++i) {
    if (aligned[i] == std::string::npos) continue;
    const bool continues =
        i > 0 && aligned[i - 1] != std::string::npos && aligned[i] == aligned[i - 1] + 1;
    if (!continues) ++chunks;
  }
  const double precision = static_cast<double>(m) / hyp.size();
  const double recall = static_cast<double>(m) / ref.size();
  const double fmean = precision * recall / (p.alpha * precision + (1 - p.alpha) * recall);
  const double penalty = p.gamma * std::pow(static_cast<double>(chunks) / m, p.beta);
  return fmean * (1 - penalty);
}

double meteor(std::string_view hypothesis, std::string_view reference, const MeteorParams& p) {
  return meteor_tokens(tokenize(hypothesis), tokenize(reference), p);
}

}  // namespace dialight::eval
