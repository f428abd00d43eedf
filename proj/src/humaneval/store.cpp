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

#include "dialight/humaneval/store.hpp"

#include <unistd.h>

#include <fstream>

#include "dialight/core/error.hpp"

namespace dialight::humaneval {

using nlohmann::json;

json to_json(const Account& a) {
  return {{"user_id", a.user_id},
          {"credential", a.credential},
          {"role", to_string(a.role)},
          {"consent_given", a.consent_given},
          {"consent_at", a.consent_at}};
}

Account account_from_json(const json& j) {
  Account a;
  a.user_id = j.at("user_id").get<std::string>();
  a.credential = j.at("credential").get<std::string>();
  a.role = role_from_string(j.at("role").get<std::string>());
  a.consent_given = j.at("consent_given").get<bool>();
  a.consent_at = j.at("consent_at").get<int64_t>();
  return a;
}

json to_json(const SessionRecord& s) {
  return {{"session_id", s.session_id},       {"user_id", s.user_id},
          {"task_id", s.task_id},             {"system_label", s.system_label},
          {"backend_session", s.backend_session}, {"created_at", s.created_at},
          {"turns", s.turns}};
}

SessionRecord session_from_json(const json& j) {
  SessionRecord s;
  s.session_id = j.at("session_id").get<std::string>();
  s.user_id = j.at("user_id").get<std::string>();
  s.task_id = j.at("task_id").get<std::string>();
  s.system_label = j.at("system_label").get<std::string>();
  s.backend_session = j.at("backend_session").get<std::string>();
  s.created_at = j.at("created_at").get<int64_t>();
  for (const auto& t : j.value("turns", json::array())) s.turns.push_back(t);
  return s;
}

json to_json(const FeedbackRecord& f) {
  return {{"user_id", f.user_id},
          {"session_id", f.session_id},
          {"turn", f.turn ? json(*f.turn) : json(nullptr)},
          {"question_id", f.question_id},
          {"answer", f.answer},
          {"timestamp", f.timestamp}};
}

FeedbackRecord feedback_from_json(const json& j) {
  FeedbackRecord f;
  f.user_id = j.at("user_id").get<std::string>();
  f.session_id = j.at("session_id").get<std::string>();
  if (j.contains("turn") && !j.at("turn").is_null()) f.turn = j.at("turn").get<size_t>();
  f.question_id = j.at("question_id").get<std::string>();
  f.answer = j.at("answer");
  f.timestamp = j.at("timestamp").get<int64_t>();
  return f;
}

void Store::apply(const json& event) {
  const std::string type = event.at("type").get<std::string>();
  if (type == "account") {
    auto a = account_from_json(event.at("record"));
    accounts_[a.user_id] = std::move(a);
  } else if (type == "session") {
    auto s = session_from_json(event.at("record"));
    sessions_[s.session_id] = std::move(s);
  } else if (type == "turn") {
    auto it = sessions_.find(event.at("session_id").get<std::string>());
    if (it == sessions_.end()) throw ParseError("store", "turn for unknown session");
    it->second.turns.push_back(event.at("turn"));
  } else if (type == "feedback") {
    auto f = feedback_from_json(event.at("record"));
    feedback_[f.key()] = std::move(f);
  } else {
    throw ParseError("store", "unknown event type '" + type + "'");
  }
}

void Store::create_account(const Account& a) {
  std::lock_guard lock(mu_);
  if (accounts_.count(a.user_id)) throw ConflictError("user '" + a.user_id + "' already exists");
  const json event = {{"type", "account"}, {"record", to_json(a)}};
  persist(event);
  apply(event);
}

void Store::update_account(const Account& a) {
  std::lock_guard lock(mu_);
  if (!accounts_.count(a.user_id)) throw NotFoundError("unknown user '" + a.user_id + "'");
  const json event = {{"type", "account"}, {"record", to_json(a)}};
  persist(event);
  apply(event);
}

std::optional<Account> Store::account(const std::string& user_id) const {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(user_id);
  if (it == accounts_.end()) return std::nullopt;
  return it->second;
}

std::vector<Account> Store::accounts() const {
  std::lock_guard lock(mu_);
  std::vector<Account> out;
  for (const auto& [id, a] : accounts_) out.push_back(a);
  return out;
}

void Store::create_session(const SessionRecord& s) {
  std::lock_guard lock(mu_);
  if (sessions_.count(s.session_id)) throw ConflictError("session exists");
  const json event = {{"type", "session"}, {"record", to_json(s)}};
  persist(event);
  apply(event);
}

void Store::append_turn(const std::string& session_id, const json& turn) {
  std::lock_guard lock(mu_);
  if (!sessions_.count(session_id)) throw NotFoundError("unknown session '" + session_id + "'");
  const json event = {{"type", "turn"}, {"session_id", session_id}, {"turn", turn}};
  persist(event);
  apply(event);
}

std::optional<SessionRecord> Store::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<SessionRecord> Store::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<SessionRecord> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::vector<SessionRecord> Store::sessions_of(const std::string& user_id) const {
  std::lock_guard lock(mu_);
  std::vector<SessionRecord> out;
  for (const auto& [id, s] : sessions_) {
    if (s.user_id == user_id) out.push_back(s);
  }
  return out;
}

void Store::put_feedback(const FeedbackRecord& f) {
  std::lock_guard lock(mu_);
  const json event = {{"type", "feedback"}, {"record", to_json(f)}};
  persist(event);
  apply(event);
}

std::vector<FeedbackRecord> Store::feedback() const {
  std::lock_guard lock(mu_);
  std::vector<FeedbackRecord> out;
  for (const auto& [k, f] : feedback_) out.push_back(f);
  return out;
}

FileStore::FileStore(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ifstream in(path);
    std::string line;
    size_t line_no = 0;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    const bool torn_tail = [&] {
      if (lines.empty()) return false;
      std::ifstream raw(path, std::ios::binary | std::ios::ate);
      const auto size = raw.tellg();
      if (size <= 0) return false;
      raw.seekg(static_cast<std::streamoff>(size) - 1);
      return raw.get() != '\n';
    }();
    for (const auto& l : lines) {
      ++line_no;
      if (l.empty()) continue;
      const bool last = line_no == lines.size();
      try {
        apply(json::parse(l));
      } catch (const std::exception& e) {
        if (last && torn_tail) {
          ++dropped_;
          continue;
        }
        throw ParseError(path.string() + ":" + std::to_string(line_no), e.what());
      }
    }
    if (torn_tail && dropped_ == 0) {
      // Complete record without its newline; keep it and terminate the line.
      std::ofstream(path, std::ios::app) << '\n';
    }
  }
  if (dropped_ > 0) {
    // Rewrite without the torn tail so later appends start on a fresh line.
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    content.resize(content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1);
    const auto tmp = path.string() + ".tmp";
    std::ofstream(tmp, std::ios::binary | std::ios::trunc) << content;
    std::filesystem::rename(tmp, path);
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) throw Error("cannot open store " + path.string());
}

FileStore::~FileStore() {
  if (file_) std::fclose(file_);
}

void FileStore::persist(const json& event) {
  const std::string line = event.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      ::fsync(::fileno(file_)) != 0) {
    throw UnavailableError("store write failed");
  }
}

}  // namespace dialight::humaneval
