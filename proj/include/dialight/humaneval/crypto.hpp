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

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace dialight::humaneval {

std::string base64url_encode(std::string_view bytes);
// Throws AuthError on characters outside the URL-safe alphabet.
std::string base64url_decode(std::string_view text);

std::string hmac_sha256(std::string_view key, std::string_view message);
std::string random_bytes(size_t n);
std::string to_hex(std::string_view bytes);
bool constant_time_equal(std::string_view a, std::string_view b);

// "pbkdf2_sha256$<iterations>$<salt b64url>$<hash b64url>"
std::string hash_password(std::string_view password, int iterations = 100000);
bool verify_password(std::string_view password, std::string_view encoded);

using Clock = std::function<int64_t()>;  // seconds since the epoch
Clock system_clock();

enum class Role { kParticipant, kAdministrator };
const char* to_string(Role r);
Role role_from_string(const std::string& s);

struct Claims {
  std::string sub;
  Role role = Role::kParticipant;
  int64_t iat = 0;
  int64_t exp = 0;
};

// HS256 JSON Web Tokens.
class TokenSigner {
 public:
  TokenSigner(std::string secret, int64_t ttl_seconds = 24 * 3600, Clock clock = system_clock());

  std::string issue(const std::string& subject, Role role) const;
  // Throws AuthError for malformed, tampered or expired tokens.
  Claims verify(std::string_view token) const;

  int64_t ttl() const { return ttl_; }
  int64_t now() const { return clock_(); }

 private:
  std::string secret_;
  int64_t ttl_;
  Clock clock_;
};

}  // namespace dialight::humaneval
