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

#include "service/experiment_service.hpp"

#include <unistd.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::service {

const char* to_string(Task t) { return t == Task::Verification ? "verification" : "triadic"; }

Task parse_task(const std::string& s) {
  std::string k = text::casefold(text::trim(s));
  if (k == "verification") return Task::Verification;
  if (k == "triadic") return Task::Triadic;
  fail(ErrorCode::InvalidArgument, "unknown task '" + s + "'");
}

std::vector<VerificationItem> load_verification_items(const std::filesystem::path& path) {
  std::vector<VerificationItem> out;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto f = text::split(line.text, '\t');
    if (f.size() != 2 || text::trim(f[0]).empty() || text::trim(f[1]).empty()) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line.number) +
                                 ": expected concept<TAB>feature");
    }
    out.push_back({text::trim(f[0]), text::trim(f[1])});
  }
  return out;
}

namespace {

std::string new_token() {
  std::random_device rd;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t v = rd();
    for (int k = 0; k < 8; ++k) {
      out += kHex[v & 0xf];
      v >>= 4;
    }
  }
  return out;
}

const char* header(Task t) {
  return t == Task::Verification ? "# participant\tconcept\tfeature\tresponse\n"
                                 : "# participant\ttriplet_id\tchoice\n";
}

}  // namespace

ExperimentService::ExperimentService(ItemPool pool, AssignmentPolicy policy,
                                     std::filesystem::path data_dir, Clock clock)
    : pool_(std::move(pool)),
      policy_(policy),
      data_dir_(std::move(data_dir)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })) {
  if (policy_.target_per_item < 1) fail(ErrorCode::InvalidArgument, "target per item must be positive");
  std::filesystem::create_directories(data_dir_);
  for (std::size_t i = 0; i < pool_.verification.size(); ++i) {
    const auto& it = pool_.verification[i];
    if (!verification_index_.emplace(std::pair{text::casefold(it.concept_label), it.feature}, i).second) {
      fail(ErrorCode::InvalidArgument, "duplicate verification item (" + it.concept_label + ", " +
                                           it.feature + ")");
    }
  }
  verification_.log_path = data_dir_ / "verification.log";
  triadic_.log_path = data_dir_ / "triadic.log";
  for (Task t : {Task::Verification, Task::Triadic}) {
    TaskState& ts = state(t);
    ts.collected.assign(pool_size(t), 0);
    ts.outstanding.assign(pool_size(t), 0);
    replay(t);
    ts.log = std::fopen(ts.log_path.c_str(), "ab");
    if (!ts.log) fail(ErrorCode::Io, "cannot open " + ts.log_path.string());
  }
}

ExperimentService::~ExperimentService() {
  for (TaskState* ts : {&verification_, &triadic_}) {
    if (ts->log) std::fclose(ts->log);
  }
}

std::size_t ExperimentService::pool_size(Task t) const {
  return t == Task::Verification ? pool_.verification.size() : pool_.triads.size();
}

void ExperimentService::replay(Task task) {
  TaskState& ts = state(task);
  if (!std::filesystem::exists(ts.log_path)) return;
  std::string data = text::read_file(ts.log_path);
  std::size_t complete = data.rfind('\n');
  std::size_t keep = complete == std::string::npos ? 0 : complete + 1;
  for (const auto& line : text::split(std::string_view(data).substr(0, keep), '\n')) {
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (task == Task::Verification) {
      if (f.size() != 4) fail(ErrorCode::Parse, ts.log_path.string() + ": malformed record");
      auto it = verification_index_.find({text::casefold(f[1]), f[2]});
      if (it == verification_index_.end()) continue;  // item no longer in the pool
      if (f[3] != "skip") ++ts.collected[it->second];
    } else {
      if (f.size() != 3) fail(ErrorCode::Parse, ts.log_path.string() + ": malformed record");
      auto id = static_cast<std::size_t>(text::parse_int(f[1]));
      if (id < ts.collected.size()) ++ts.collected[id];
    }
  }
  if (keep != data.size()) std::filesystem::resize_file(ts.log_path, keep);
}

void ExperimentService::append(TaskState& ts, const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), ts.log) != line.size() || std::fflush(ts.log) != 0 ||
      ::fsync(::fileno(ts.log)) != 0) {
    fail(ErrorCode::Io, "cannot persist response to " + ts.log_path.string());
  }
}

void ExperimentService::release(SessionState& s) {
  TaskState& ts = state(s.session.task);
  for (std::size_t k = s.session.cursor; k < s.session.items.size(); ++k) {
    if (!s.answered[k]) --ts.outstanding[s.session.items[k]];
  }
}

void ExperimentService::expire_sessions() {
  const auto now = clock_();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_seen > policy_.session_ttl) {
      release(it->second);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

ExperimentService::SessionState& ExperimentService::find_session(const std::string& id) {
  expire_sessions();
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown or expired session '" + id + "'");
  it->second.last_seen = clock_();
  return it->second;
}

Session ExperimentService::start_session(const std::string& task_name,
                                         const std::string& participant) {
  const Task task = parse_task(task_name);
  if (text::trim(participant).empty()) fail(ErrorCode::InvalidArgument, "participant is required");
  for (unsigned char c : participant) {
    if (c < 0x20 || c == 0x7f) {
      fail(ErrorCode::InvalidArgument, "participant id contains a control character");
    }
  }
  std::lock_guard lock(mu_);
  expire_sessions();
  const std::size_t n = pool_size(task);
  if (n == 0) fail(ErrorCode::State, std::string("the ") + to_string(task) + " item pool is empty");

  TaskState& ts = state(task);
  rng::Engine engine = rng::stream(policy_.seed, sessions_started_++);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::shuffle(order, engine);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ts.collected[x] + ts.outstanding[x] < ts.collected[y] + ts.outstanding[y];
  });
  std::size_t batch = task == Task::Verification ? policy_.verification_batch : policy_.triadic_batch;
  if (batch == 0 || batch > n) batch = n;
  order.resize(batch);
  rng::shuffle(order, engine);
  for (auto idx : order) ++ts.outstanding[idx];

  SessionState s;
  s.session.id = new_token();
  s.session.task = task;
  s.session.participant = text::trim(participant);
  s.session.items = std::move(order);
  s.answered.assign(s.session.items.size(), false);
  s.last_seen = clock_();
  Session out = s.session;
  sessions_.emplace(out.id, std::move(s));
  return out;
}

std::optional<Item> ExperimentService::next_item(const std::string& session_id) {
  std::lock_guard lock(mu_);
  SessionState& s = find_session(session_id);
  if (s.session.cursor >= s.session.items.size()) return std::nullopt;
  Item item;
  item.task = s.session.task;
  item.id = s.session.items[s.session.cursor];
  if (item.task == Task::Verification) {
    item.verification = &pool_.verification[item.id];
  } else {
    item.triad = &pool_.triads[item.id];
  }
  return item;
}

SubmitResult ExperimentService::submit_response(const std::string& session_id, std::size_t item_id,
                                                const std::string& payload) {
  std::lock_guard lock(mu_);
  SessionState& s = find_session(session_id);
  Session& session = s.session;
  for (std::size_t k = 0; k < session.cursor; ++k) {
    if (session.items[k] == item_id && s.answered[k]) {
      return {true, session.cursor >= session.items.size()};
    }
  }
  if (session.cursor >= session.items.size()) {
    fail(ErrorCode::State, "session is complete; item " + std::to_string(item_id) + " is not pending");
  }
  if (session.items[session.cursor] != item_id) {
    fail(ErrorCode::State, "out-of-order response: expected item " +
                               std::to_string(session.items[session.cursor]) + ", got " +
                               std::to_string(item_id));
  }

  TaskState& ts = state(session.task);
  const std::string answer = text::trim(payload);
  bool skip = false;
  std::string line;
  if (session.task == Task::Verification) {
    std::string a = text::casefold(answer);
    if (a != "true" && a != "false" && a != "skip") {
      fail(ErrorCode::InvalidArgument, "verification response must be true, false or skip");
    }
    skip = a == "skip";
    const auto& item = pool_.verification[item_id];
    line = session.participant + '\t' + item.concept_label + '\t' + item.feature + '\t' + a + '\n';
  } else {
    if (answer != "A" && answer != "B") {
      fail(ErrorCode::InvalidArgument, "triadic response must be A or B");
    }
    line = session.participant + '\t' + std::to_string(item_id) + '\t' + answer + '\n';
  }
  append(ts, line);

  --ts.outstanding[item_id];
  if (!skip) ++ts.collected[item_id];
  s.answered[session.cursor] = true;
  ++session.cursor;

  if (skip) {
    // Replacement: the least-judged item not already in this session.
    std::vector<bool> in_session(pool_size(session.task), false);
    for (auto idx : session.items) in_session[idx] = true;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < in_session.size(); ++i) {
      if (in_session[i]) continue;
      if (!best || ts.collected[i] + ts.outstanding[i] <
                       ts.collected[*best] + ts.outstanding[*best]) {
        best = i;
      }
    }
    if (best) {
      session.items.push_back(*best);
      s.answered.push_back(false);
      ++ts.outstanding[*best];
    }
  }
  return {false, session.cursor >= session.items.size()};
}

std::string ExperimentService::export_task(Task task) const {
  std::lock_guard lock(mu_);
  const TaskState& ts = state(task);
  std::string out = header(task);
  if (std::filesystem::exists(ts.log_path)) {
    std::string data = text::read_file(ts.log_path);
    std::size_t complete = data.rfind('\n');
    if (complete != std::string::npos) out += data.substr(0, complete + 1);
  }
  return out;
}

std::vector<int> ExperimentService::collected(Task task) const {
  std::lock_guard lock(mu_);
  return state(task).collected;
}

}  // namespace normforge::service
