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

#include "dialight/core/placeholders.hpp"

namespace dialight {
namespace {

constexpr std::string_view kOpen = "[value_";

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

std::vector<Placeholder> extract_placeholders(std::string_view text) {
  std::vector<Placeholder> out;
  size_t pos = 0;
  while ((pos = text.find(kOpen, pos)) != std::string_view::npos) {
    size_t end = pos + kOpen.size();
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end < text.size() && text[end] == ']' && end > pos + kOpen.size()) {
      std::string_view slot = text.substr(pos + kOpen.size(), end - pos - kOpen.size());
      out.push_back({std::string(text.substr(pos, end + 1 - pos)), std::string(slot), pos});
      pos = end + 1;
    } else {
      ++pos;
    }
  }
  return out;
}

DelexResponse make_delex(std::string text) {
  DelexResponse d;
  d.placeholders = extract_placeholders(text);
  d.text = std::move(text);
  return d;
}

}  // namespace dialight
