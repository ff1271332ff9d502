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

#include "mock/mock_servers.hpp"

#include <thread>

#include "common/error.hpp"
#include "common/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace normforge::mock {

using nlohmann::json;

void ChatScript::add(const std::string& model, const std::string& concept_label,
                     const std::string& feature, const std::string& answer) {
  answers[{model, text::casefold(text::trim(concept_label)), text::trim(feature)}] = answer;
}

std::string ChatScript::answer(const std::string& model, const std::string& concept_label,
                               const std::string& feature) const {
  const std::string c = text::casefold(text::trim(concept_label));
  const std::string f = text::trim(feature);
  if (auto it = answers.find({model, c, f}); it != answers.end()) return it->second;
  if (auto it = answers.find({"*", c, f}); it != answers.end()) return it->second;
  return default_answer;
}

ChatScript load_chat_script(const std::filesystem::path& path) {
  ChatScript s;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto f = text::split(line.text, '\t');
    if (f.size() == 2 && f[0] == "default") {
      s.default_answer = text::unescape_field(f[1]);
    } else if (f.size() == 4) {
      s.add(f[0], f[1], f[2], text::unescape_field(f[3]));
    } else {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line.number) +
                                 ": expected model<TAB>concept<TAB>feature<TAB>answer");
    }
  }
  return s;
}

bool extract_pair(const std::string& prompt, std::string& concept_label, std::string& feature) {
  static const std::string kHead = "Is the property [";
  static const std::string kMid = "] true for [";
  static const std::string kTail = "]?";
  std::size_t start = prompt.rfind(kHead);
  if (start == std::string::npos) return false;
  std::size_t f0 = start + kHead.size();
  std::size_t mid = prompt.find(kMid, f0);
  if (mid == std::string::npos) return false;
  std::size_t c0 = mid + kMid.size();
  std::size_t tail = prompt.rfind(kTail);
  if (tail == std::string::npos || tail < c0) return false;
  feature = prompt.substr(f0, mid - f0);
  concept_label = prompt.substr(c0, tail - c0);
  return true;
}

namespace {

// Shared server plumbing for both mocks.
struct ServerBase {
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;

  int start(const std::string& h, int p) {
    host = h;
    port = p == 0 ? server.bind_to_any_port(h) : (server.bind_to_port(h, p) ? p : -1);
    if (port < 0) fail(ErrorCode::Io, "mock: cannot bind " + h + ":" + std::to_string(p));
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    return port;
  }
  void stop() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

void error_reply(httplib::Response& res, int status, const std::string& msg) {
  res.status = status;
  res.set_content(json{{"error", {{"message", msg}}}}.dump(), "application/json");
}

}  // namespace

struct MockChatServer::Impl : ServerBase {
  ChatScript script;
  mutable std::mutex mu;
  std::map<std::string, std::size_t> per_model;
  std::vector<std::string> prompts;
  std::size_t total = 0;
  std::size_t budget = SIZE_MAX;

  void handle(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("messages") || !body["messages"].is_array() ||
        body["messages"].empty()) {
      error_reply(res, 400, "expected {model, messages}");
      return;
    }
    const std::string model = body.value("model", "");
    const std::string prompt = body["messages"].back().value("content", "");
    std::string concept_label, feature;
    if (!extract_pair(prompt, concept_label, feature)) {
      error_reply(res, 400, "no question in prompt");
      return;
    }
    {
      std::lock_guard lock(mu);
      if (budget == 0) {
        error_reply(res, 500, "scripted failure");
        return;
      }
      if (budget != SIZE_MAX) --budget;
      ++total;
      ++per_model[model];
      prompts.push_back(prompt);
    }
    json reply = {{"id", "mock"},
                  {"object", "chat.completion"},
                  {"model", model},
                  {"choices",
                   {{{"index", 0},
                     {"message", {{"role", "assistant"},
                                  {"content", script.answer(model, concept_label, feature)}}},
                     {"finish_reason", "stop"}}}}};
    res.set_content(reply.dump(), "application/json");
  }
};

MockChatServer::MockChatServer(ChatScript script) : impl_(std::make_unique<Impl>()) {
  impl_->script = std::move(script);
  impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    impl_->handle(req, res);
  });
}

MockChatServer::~MockChatServer() { stop(); }
int MockChatServer::start(const std::string& host, int port) { return impl_->start(host, port); }
void MockChatServer::stop() { impl_->stop(); }

std::string MockChatServer::url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1/chat/completions";
}

std::size_t MockChatServer::requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->total;
}

std::size_t MockChatServer::requests(const std::string& model) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->per_model.find(model);
  return it == impl_->per_model.end() ? 0 : it->second;
}

std::vector<std::string> MockChatServer::prompts() const {
  std::lock_guard lock(impl_->mu);
  return impl_->prompts;
}

void MockChatServer::fail_after(std::size_t n) {
  std::lock_guard lock(impl_->mu);
  impl_->budget = n;
}

void MockChatServer::reset_counts() {
  std::lock_guard lock(impl_->mu);
  impl_->total = 0;
  impl_->per_model.clear();
  impl_->prompts.clear();
  impl_->budget = SIZE_MAX;
}

// ---- embeddings -----------------------------------------------------------

EmbeddingScript load_embedding_script(const std::filesystem::path& path) {
  EmbeddingScript s;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto where = path.string() + ":" + std::to_string(line.number) + ": ";
    auto f = text::split(line.text, '\t');
    if (f.size() != 2) fail(ErrorCode::Parse, where + "expected phrase<TAB>v1,v2,...");
    if (f[0] == "dimension") {
      s.dimension = static_cast<std::size_t>(text::parse_int(f[1]));
      continue;
    }
    std::vector<double> v;
    for (const auto& x : text::split(f[1], ',')) v.push_back(text::parse_double(x));
    s.vectors[text::unescape_field(f[0])] = std::move(v);
  }
  for (const auto& [phrase, v] : s.vectors) {
    if (v.size() != s.dimension) {
      fail(ErrorCode::Parse, path.string() + ": vector for '" + phrase + "' has dimension " +
                                 std::to_string(v.size()) + ", expected " +
                                 std::to_string(s.dimension));
    }
  }
  return s;
}

std::vector<double> bag_of_words_vector(const std::string& phrase, std::size_t dimension) {
  std::vector<double> v(dimension, 0.0);
  for (const auto& w : text::split_whitespace(text::casefold(phrase))) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : w) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    v[h % dimension] += (h >> 63) ? -1.0 : 1.0;
  }
  bool zero = true;
  for (double x : v) zero = zero && x == 0.0;
  if (zero) v[0] = 1.0;
  return v;
}

struct MockEmbeddingServer::Impl : ServerBase {
  EmbeddingScript script;
  mutable std::mutex mu;
  std::size_t total = 0;
  std::size_t phrases = 0;

  void handle(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("input") || !body["input"].is_array()) {
      error_reply(res, 400, "expected {model, input: [...]}");
      return;
    }
    json data = json::array();
    std::size_t k = 0;
    for (const auto& item : body["input"]) {
      const std::string p = item.get<std::string>();
      auto it = script.vectors.find(p);
      auto v = it != script.vectors.end() ? it->second : bag_of_words_vector(p, script.dimension);
      data.push_back({{"object", "embedding"}, {"index", k++}, {"embedding", v}});
    }
    {
      std::lock_guard lock(mu);
      ++total;
      phrases += k;
    }
    res.set_content(json{{"object", "list"}, {"data", data}, {"model", body.value("model", "")}}.dump(),
                    "application/json");
  }
};

MockEmbeddingServer::MockEmbeddingServer(EmbeddingScript script)
    : impl_(std::make_unique<Impl>()) {
  impl_->script = std::move(script);
  impl_->server.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
    impl_->handle(req, res);
  });
}

MockEmbeddingServer::~MockEmbeddingServer() { stop(); }
int MockEmbeddingServer::start(const std::string& host, int port) {
  return impl_->start(host, port);
}
void MockEmbeddingServer::stop() { impl_->stop(); }

std::string MockEmbeddingServer::url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1/embeddings";
}

std::size_t MockEmbeddingServer::requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->total;
}

std::size_t MockEmbeddingServer::phrases_embedded() const {
  std::lock_guard lock(impl_->mu);
  return impl_->phrases;
}

void MockEmbeddingServer::reset_counts() {
  std::lock_guard lock(impl_->mu);
  impl_->total = 0;
  impl_->phrases = 0;
}

}  // namespace normforge::mock
