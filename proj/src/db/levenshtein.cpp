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

#include "dialight/db/levenshtein.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <vector>

#include "dialight/core/text.hpp"

namespace dialight::db {
namespace kernels {

size_t levenshtein_scalar(std::span<const char32_t> a, std::span<const char32_t> b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.size();
  std::vector<size_t> row(a.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t j = 1; j <= b.size(); ++j) {
    size_t diag = row[0];
    row[0] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
      const size_t up = row[i];
      row[i] = std::min({row[i] + 1,                               // deletion
                         row[i - 1] + 1,                           // insertion
                         diag + (a[i - 1] == b[j - 1] ? 0 : 1)});  // substitution
      diag = up;
    }
  }
  return row[a.size()];
}

#if !defined(DIALIGHT_HAVE_AVX2)
size_t levenshtein_avx2(std::span<const char32_t> a, std::span<const char32_t> b) {
  return levenshtein_scalar(a, b);
}
#endif

}  // namespace kernels

namespace {

Isa detect_isa() {
  if (const char* env = std::getenv("DIALIGHT_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
    if (std::strcmp(env, "avx2") == 0 && isa_available(Isa::kAvx2)) return Isa::kAvx2;
  }
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<int>& isa_slot() {
  static std::atomic<int> slot{static_cast<int>(detect_isa())};
  return slot;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(DIALIGHT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) isa = Isa::kScalar;
  isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  // Common prefix and suffix never change the distance.
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  std::span<const char32_t> sa(a.data(), a.size()), sb(b.data(), b.size());
  // Wavefront setup only pays off past a handful of diagonals.
  if (active_isa() == Isa::kAvx2 && std::min(a.size(), b.size()) >= 8) {
    return kernels::levenshtein_avx2(sa, sb);
  }
  return kernels::levenshtein_scalar(sa, sb);
}

size_t levenshtein(std::string_view a, std::string_view b) {
  if (a == b) return 0;
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  return levenshtein(std::u32string_view(ua), std::u32string_view(ub));
}

}  // namespace dialight::db
