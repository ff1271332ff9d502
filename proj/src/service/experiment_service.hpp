// Copyright 2026 The normforge Authors
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

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "judgment/judgment.hpp"

namespace normforge::service {

enum class Task { Verification, Triadic };

const char* to_string(Task t);
Task parse_task(const std::string& s);  // "verification" | "triadic"

struct VerificationItem {
  std::string concept_label;
  std::string feature;
};

struct ItemPool {
  std::vector<VerificationItem> verification;
  std::vector<judgment::LabeledTriplet> triads;  // item id = triplet id
};

// Line records `concept TAB feature`.
std::vector<VerificationItem> load_verification_items(const std::filesystem::path& path);

struct AssignmentPolicy {
  int target_per_item = 5;
  std::size_t verification_batch = 110;
  std::size_t triadic_batch = 0;  // 0 means every triplet
  std::uint64_t seed = 0;
  std::chrono::seconds session_ttl{24 * 3600};
};

struct Session {
  std::string id;
  Task task = Task::Verification;
  std::string participant;
  std::vector<std::size_t> items;
  std::size_t cursor = 0;
};

struct Item {
  Task task = Task::Verification;
  std::size_t id = 0;
  const VerificationItem* verification = nullptr;
  const judgment::LabeledTriplet* triad = nullptr;
};

struct SubmitResult {
  bool duplicate = false;
  bool done = false;
};

// Serves items to participants and stores their answers. Answers go to one
// append-only log per task (`verification.log`, `triadic.log` in the data
// directory), written and fsync'ed before the call returns. The log lines use
// the judgment ingestion formats, so an export is a header plus the log.
// Counts are rebuilt from the logs at construction.
class ExperimentService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  ExperimentService(ItemPool pool, AssignmentPolicy policy, std::filesystem::path data_dir,
                    Clock clock = {});
  ~ExperimentService();
  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  // Picks the batch among the items with the fewest collected plus
  // outstanding judgments (ties broken at random) and presents it in random
  // order.
  Session start_session(const std::string& task, const std::string& participant);

  // Current item, or nullopt once the session is done. Repeated calls return
  // the same item until it is answered.
  std::optional<Item> next_item(const std::string& session_id);

  // Payload: true|false|skip for verification, A|B for triadic. The item
  // must be the current one; resubmitting an already answered item is
  // acknowledged without storing anything. A skipped verification item goes
  // back to the pool and the session receives a replacement.
  SubmitResult submit_response(const std::string& session_id, std::size_t item_id,
                               const std::string& payload);

  std::string export_task(Task task) const;

  // Non-skipped judgments stored per item.
  std::vector<int> collected(Task task) const;
  const ItemPool& pool() const { return pool_; }

 private:
  struct TaskState {
    std::vector<int> collected;
    std::vector<int> outstanding;
    std::filesystem::path log_path;
    std::FILE* log = nullptr;
  };
  struct SessionState {
    Session session;
    std::vector<bool> answered;  // parallel to session.items
    std::chrono::steady_clock::time_point last_seen;
  };

  TaskState& state(Task t) { return t == Task::Verification ? verification_ : triadic_; }
  const TaskState& state(Task t) const { return t == Task::Verification ? verification_ : triadic_; }
  std::size_t pool_size(Task t) const;
  SessionState& find_session(const std::string& id);
  void expire_sessions();
  void release(SessionState& s);
  void append(TaskState& ts, const std::string& line);
  void replay(Task task);

  ItemPool pool_;
  AssignmentPolicy policy_;
  std::filesystem::path data_dir_;
  Clock clock_;
  mutable std::mutex mu_;
  TaskState verification_;
  TaskState triadic_;
  std::map<std::pair<std::string, std::string>, std::size_t> verification_index_;
  std::map<std::string, SessionState> sessions_;
  std::uint64_t sessions_started_ = 0;
};

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;
  std::string admin_token;  // required for exports when non-empty
};

// HTTP front end:
//   POST /api/session {task, participant}
//   GET  /api/session/{id}/next
//   POST /api/session/{id}/response {item, response}
//   GET  /api/export/{task}
// plus static files from static_dir.
class HttpFrontend {
 public:
  HttpFrontend(ExperimentService& service, HttpOptions options);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace normforge::service
