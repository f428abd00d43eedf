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

#include "dialight/humaneval/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <chrono>
#include <vector>

#include "dialight/core/error.hpp"
#include "dialight/core/text.hpp"

#include "json.hpp"

namespace dialight::humaneval {

using nlohmann::json;

std::string base64url_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  while (!out.empty() && out.back() == '=') out.pop_back();
  for (char& c : out) {
    if (c == '+') c = '-';
    if (c == '/') c = '_';
  }
  return out;
}

std::string base64url_decode(std::string_view text) {
  std::string std64(text);
  for (char& c : std64) {
    if (c == '-') {
      c = '+';
    } else if (c == '_') {
      c = '/';
    } else if (!std::isalnum(static_cast<unsigned char>(c))) {
      throw AuthError("invalid base64url");
    }
  }
  if (std64.size() % 4 == 1) throw AuthError("invalid base64url length");
  const size_t pad = (4 - std64.size() % 4) % 4;
  std64.append(pad, '=');
  std::string out(std64.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(std64.data()),
                                static_cast<int>(std64.size()));
  if (n < 0) throw AuthError("invalid base64url");
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

std::string hmac_sha256(std::string_view key, std::string_view message) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
       reinterpret_cast<const unsigned char*>(message.data()), message.size(), digest, &len);
  return std::string(reinterpret_cast<char*>(digest), len);
}

std::string random_bytes(size_t n) {
  std::string out(n, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(out.data()), static_cast<int>(n)) != 1) {
    throw Error("RAND_bytes failed");
  }
  return out;
}

std::string to_hex(std::string_view bytes) {
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 15]);
  }
  return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

namespace {

std::string pbkdf2(std::string_view password, std::string_view salt, int iterations) {
  std::string out(32, '\0');
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt.data()),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(), 32,
                        reinterpret_cast<unsigned char*>(out.data())) != 1) {
    throw Error("PBKDF2 failed");
  }
  return out;
}

}  // namespace

std::string hash_password(std::string_view password, int iterations) {
  if (iterations < 1) throw ValidationError("iterations must be positive");
  const std::string salt = random_bytes(16);
  return "pbkdf2_sha256$" + std::to_string(iterations) + "$" + base64url_encode(salt) + "$" +
         base64url_encode(pbkdf2(password, salt, iterations));
}

bool verify_password(std::string_view password, std::string_view encoded) {
  const auto parts = text::split(encoded, "$");
  if (parts.size() != 4 || parts[0] != "pbkdf2_sha256") return false;
  try {
    const int iterations = std::stoi(parts[1]);
    const std::string salt = base64url_decode(parts[2]);
    const std::string expected = base64url_decode(parts[3]);
    return constant_time_equal(pbkdf2(password, salt, iterations), expected);
  } catch (const std::exception&) {
    return false;
  }
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

const char* to_string(Role r) { return r == Role::kAdministrator ? "administrator" : "participant"; }

Role role_from_string(const std::string& s) {
  if (s == "participant") return Role::kParticipant;
  if (s == "administrator" || s == "admin") return Role::kAdministrator;
  throw ValidationError("unknown role '" + s + "'");
}

TokenSigner::TokenSigner(std::string secret, int64_t ttl_seconds, Clock clock)
    : secret_(std::move(secret)), ttl_(ttl_seconds), clock_(std::move(clock)) {
  if (secret_.size() < 16) throw ValidationError("token secret must be at least 16 bytes");
  if (ttl_ <= 0) throw ValidationError("token ttl must be positive");
}

std::string TokenSigner::issue(const std::string& subject, Role role) const {
  const int64_t now = clock_();
  const std::string header = base64url_encode(R"({"alg":"HS256","typ":"JWT"})");
  const std::string payload = base64url_encode(
      json{{"sub", subject}, {"role", to_string(role)}, {"iat", now}, {"exp", now + ttl_}}.dump());
  const std::string signing_input = header + "." + payload;
  return signing_input + "." + base64url_encode(hmac_sha256(secret_, signing_input));
}

Claims TokenSigner::verify(std::string_view token) const {
  const size_t a = token.find('.');
  const size_t b = a == std::string_view::npos ? a : token.find('.', a + 1);
  if (b == std::string_view::npos || token.find('.', b + 1) != std::string_view::npos) {
    throw AuthError("malformed token");
  }
  const std::string_view signing_input = token.substr(0, b);
  const std::string signature = base64url_decode(token.substr(b + 1));
  if (!constant_time_equal(signature, hmac_sha256(secret_, signing_input))) {
    throw AuthError("invalid token signature");
  }
  Claims c;
  try {
    const json header = json::parse(base64url_decode(token.substr(0, a)));
    if (header.at("alg").get<std::string>() != "HS256") throw AuthError("unsupported algorithm");
    const json payload = json::parse(base64url_decode(token.substr(a + 1, b - a - 1)));
    c.sub = payload.at("sub").get<std::string>();
    c.role = role_from_string(payload.at("role").get<std::string>());
    c.iat = payload.at("iat").get<int64_t>();
    c.exp = payload.at("exp").get<int64_t>();
  } catch (const json::exception&) {
    throw AuthError("malformed token claims");
  } catch (const ValidationError&) {
    throw AuthError("malformed token claims");
  }
  if (clock_() >= c.exp) throw AuthError("token expired");
  return c;
}

}  // namespace dialight::humaneval
