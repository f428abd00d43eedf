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

#include <cstddef>
#include <span>
#include <string_view>

namespace dialight::db {

// Unit-cost edit distance over Unicode scalar values.
size_t levenshtein(std::string_view a, std::string_view b);
size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Instruction-set variants of the distance kernel. The scalar kernel is the
// reference; every other kernel must return identical results.
enum class Isa { kScalar, kAvx2 };

const char* to_string(Isa isa);
bool isa_available(Isa isa);

// Kernel picked for levenshtein(): the best available ISA unless the
// DIALIGHT_ISA environment variable ("scalar", "avx2") or force_isa() says
// otherwise.
Isa active_isa();
void force_isa(Isa isa);

namespace kernels {

size_t levenshtein_scalar(std::span<const char32_t> a, std::span<const char32_t> b);

// Anti-diagonal wavefront, eight cells per step. Only call when
// isa_available(Isa::kAvx2).
size_t levenshtein_avx2(std::span<const char32_t> a, std::span<const char32_t> b);

}  // namespace kernels
}  // namespace dialight::db
