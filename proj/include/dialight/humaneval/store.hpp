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
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dialight/humaneval/crypto.hpp"

#include "json.hpp"

namespace dialight::humaneval {

struct Account {
  std::string user_id;
  std::string credential;  // salted hash, never the password
  Role role = Role::kParticipant;
  bool consent_given = false;
  int64_t consent_at = 0;
};

struct SessionRecord {
  std::string session_id;
  std::string user_id;
  std::string task_id;
  std::string system_label;
  std::string backend_session;
  int64_t created_at = 0;
  // {"user", "response", "trace"} per relayed turn.
  std::vector<nlohmann::json> turns;
};

struct FeedbackRecord {
  std::string user_id;
  std::string session_id;
  std::optional<size_t> turn;  // absent for dialogue-level questions
  std::string question_id;
  nlohmann::json answer;
  int64_t timestamp = 0;

  // Uniqueness key.
  std::tuple<std::string, std::string, long long, std::string> key() const {
    return {user_id, session_id, turn ? static_cast<long long>(*turn) : -1LL, question_id};
  }
};

nlohmann::json to_json(const Account& a);
Account account_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionRecord& s);
SessionRecord session_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FeedbackRecord& f);
FeedbackRecord feedback_from_json(const nlohmann::json& j);

// Every mutation is atomic. Thread-safe.
class Store {
 public:
  virtual ~Store() = default;

  // Throws ConflictError on a duplicate user id.
  void create_account(const Account& a);
  void update_account(const Account& a);
  std::optional<Account> account(const std::string& user_id) const;
  std::vector<Account> accounts() const;

  void create_session(const SessionRecord& s);
  void append_turn(const std::string& session_id, const nlohmann::json& turn);
  std::optional<SessionRecord> session(const std::string& session_id) const;
  std::vector<SessionRecord> sessions() const;
  std::vector<SessionRecord> sessions_of(const std::string& user_id) const;

  // Last write wins per FeedbackRecord::key().
  void put_feedback(const FeedbackRecord& f);
  std::vector<FeedbackRecord> feedback() const;

 protected:
  // Called under the lock before a mutation is applied in memory.
  virtual void persist(const nlohmann::json& event) { (void)event; }
  void apply(const nlohmann::json& event);

  mutable std::mutex mu_;

 private:
  std::map<std::string, Account> accounts_;
  std::map<std::string, SessionRecord> sessions_;
  std::map<std::tuple<std::string, std::string, long long, std::string>, FeedbackRecord> feedback_;
};

class MemoryStore : public Store {};

// Append-only JSON-lines log replayed on open. A torn final line left by a
// crash is dropped.
class FileStore : public Store {
 public:
  explicit FileStore(const std::filesystem::path& path);
  ~FileStore() override;
  FileStore(const FileStore&) = delete;
  FileStore& operator=(const FileStore&) = delete;

  size_t dropped_lines() const { return dropped_; }

 protected:
  void persist(const nlohmann::json& event) override;

 private:
  std::FILE* file_ = nullptr;
  size_t dropped_ = 0;
};

}  // namespace dialight::humaneval
