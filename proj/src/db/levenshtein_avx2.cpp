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

// Compiled with -mavx2; reached only through the runtime dispatcher.

#include <immintrin.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dialight/db/levenshtein.hpp"

namespace dialight::db::kernels {

// Cells on anti-diagonal k = i + j only depend on diagonals k-1 and k-2, so
// each diagonal is filled eight rows at a time. Buffers are indexed by row i.
size_t levenshtein_avx2(std::span<const char32_t> a, std::span<const char32_t> b) {
  const int32_t n = static_cast<int32_t>(a.size());
  const int32_t m = static_cast<int32_t>(b.size());
  if (n == 0) return static_cast<size_t>(m);
  if (m == 0) return static_cast<size_t>(n);

  std::vector<int32_t> av(a.begin(), a.end());
  // brev[m-k+i] == b[k-i-1], which makes the column index contiguous in i.
  std::vector<int32_t> brev(b.rbegin(), b.rend());
  std::vector<int32_t> d0(n + 1), d1(n + 1), d2(n + 1);
  int32_t* prev2 = d0.data();
  int32_t* prev = d1.data();
  int32_t* cur = d2.data();

  const __m256i ones = _mm256_set1_epi32(1);
  for (int32_t k = 0; k <= n + m; ++k) {
    const int32_t lo = std::max(1, k - m);
    const int32_t hi = std::min(n, k - 1);
    int32_t i = lo;
    for (; i + 8 <= hi + 1; i += 8) {
      const __m256i up = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + i - 1));
      const __m256i left = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + i));
      const __m256i diag = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev2 + i - 1));
      const __m256i ca = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(av.data() + i - 1));
      const __m256i cb =
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(brev.data() + (m - k + i)));
      // eq is -1 where the code points agree, so 1 + eq is the substitution cost.
      const __m256i eq = _mm256_cmpeq_epi32(ca, cb);
      const __m256i sub = _mm256_add_epi32(diag, _mm256_add_epi32(ones, eq));
      const __m256i gap = _mm256_add_epi32(_mm256_min_epi32(up, left), ones);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(cur + i), _mm256_min_epi32(gap, sub));
    }
    for (; i <= hi; ++i) {
      const int32_t j = k - i;
      const int32_t sub = prev2[i - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[i] = std::min(std::min(prev[i - 1], prev[i]) + 1, sub);
    }
    if (k <= m) cur[0] = k;
    if (k <= n) cur[k] = k;

    int32_t* spent = prev2;
    prev2 = prev;
    prev = cur;
    cur = spent;
  }
  return static_cast<size_t>(prev[n]);
}

}  // namespace dialight::db::kernels
