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

#include <string>
#include <string_view>
#include <vector>

namespace dialight::text {

// Decodes UTF-8 into Unicode scalar values. Ill-formed sequences decode to
// U+FFFD so every byte string has a defined code point sequence.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Full Unicode default case folding (locale independent, so Turkish dotted
// capital I folds the same way in every language).
std::string casefold(std::string_view s);

// Trims Unicode white space and collapses internal runs to one ASCII space.
std::string collapse_whitespace(std::string_view s);

// casefold + collapse_whitespace. The canonical form used for domain and slot
// names and for every value comparison.
std::string normalize(std::string_view s);

std::string trim(std::string_view s);

bool is_space(char32_t c);
bool is_punct(char32_t c);

std::vector<std::string> split(std::string_view s, std::string_view sep);

}  // namespace dialight::text
