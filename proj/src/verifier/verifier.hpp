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

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/http_client.hpp"
#include "norms/norm_matrix.hpp"
#include "verifier/prompt.hpp"

namespace normforge::verifier {

struct Pair {
  int concept_id = 0;
  int feature_id = 0;
  std::string concept_label;
  std::string feature;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string model_id() const = 0;
  // Raw text of the first choice.
  virtual std::string complete(const std::string& prompt) = 0;
};

// Chat-completions wire protocol: POST {model, messages: [{role: "user",
// content}], max_tokens, temperature} and read choices[0].message.content.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(http::Endpoint endpoint, http::RetryPolicy retry, int max_tokens = 8,
                 double temperature = 0.0)
      : endpoint_(std::move(endpoint)),
        retry_(retry),
        max_tokens_(max_tokens),
        temperature_(temperature) {}

  std::string model_id() const override { return endpoint_.model; }
  std::string complete(const std::string& prompt) override;

 private:
  http::Endpoint endpoint_;
  http::RetryPolicy retry_;
  int max_tokens_;
  double temperature_;
};

struct Stage {
  std::shared_ptr<ChatClient> client;
  PromptTemplate prompt;
};

struct VerificationRecord {
  int concept_id = 0;
  int feature_id = 0;
  std::string model_id;
  PromptMode mode = PromptMode::ZeroShot;
  std::string raw_text;
  bool parsed = false;
  std::string cache_key;
  bool from_cache = false;
};

// sha256 over (model id, mode, exemplars digest, concept label, feature).
std::string cache_key(const std::string& model_id, const PromptTemplate& prompt,
                      const std::string& concept_label, const std::string& feature);

// Append-only request log that doubles as the response cache. Each line is
//   cache_key TAB model TAB mode TAB raw_text TAB parsed
// with raw_text escaped. Appends are flushed immediately; sync() forces them
// to disk. A torn last line from a crash is dropped when the log is opened.
class RequestLog {
 public:
  struct Entry {
    std::string model_id;
    std::string mode;
    std::string raw_text;
    bool parsed = false;
  };

  RequestLog() = default;  // memory only
  explicit RequestLog(std::filesystem::path file);
  ~RequestLog();
  RequestLog(const RequestLog&) = delete;
  RequestLog& operator=(const RequestLog&) = delete;

  std::optional<Entry> find(const std::string& key) const;
  bool contains(const std::string& key) const { return find(key).has_value(); }
  void append(const VerificationRecord& record);
  void sync();
  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::FILE* out_ = nullptr;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
};

// Cache lookup only; nullopt on a miss.
std::optional<VerificationRecord> lookup(const Pair& pair, const Stage& stage,
                                         const RequestLog& log);
// One chat-completion call, not logged. Transport failures are rethrown with
// the pair named.
VerificationRecord fetch(const Pair& pair, const Stage& stage);
// Cache first; on a miss fetch and append to the log.
VerificationRecord verify_pair(const Pair& pair, const Stage& stage, RequestLog& log);

struct CascadeConfig {
  Stage stage1;
  Stage stage2;
  std::size_t max_parallel = 4;
  std::size_t checkpoint_every = 1000;
};

void validate(const CascadeConfig& cfg);

struct CascadeOutcome {
  VerificationRecord stage1;
  std::optional<VerificationRecord> stage2;  // present only when stage1 said true
  bool verdict = false;
};

// Stage 2 runs only when stage 1 says true; the verdict is true only when both
// stages say true.
CascadeOutcome run_cascade(const Pair& pair, const CascadeConfig& cfg, RequestLog& log);

// Verifies many pairs with one stage: cache hits are resolved inline, misses
// are fetched by up to max_parallel workers, and new records are appended to
// the log in input order. If any fetch fails, successful ones are still
// logged and the first failure is rethrown.
std::vector<VerificationRecord> verify_batch(const std::vector<Pair>& pairs, const Stage& stage,
                                             RequestLog& log, std::size_t max_parallel);

struct ImputeSummary {
  std::size_t absent_cells = 0;     // Absent cells in the input
  std::size_t decided = 0;          // of those, decided by the end of this run
  std::size_t stage1_true = 0;
  std::size_t stage2_queries = 0;   // stage-2 verifications (cached or not)
  std::size_t final_true = 0;
  std::size_t stage1_requests = 0;  // network calls made in this run
  std::size_t stage2_requests = 0;
  std::size_t cache_hits = 0;
  bool resumed = false;
};

struct ImputeResult {
  norms::NormMatrix matrix;
  ImputeSummary summary;
};

struct ImputeOptions {
  // Progress file rewritten every checkpoint_every decisions and removed on
  // completion. Empty disables checkpointing.
  std::filesystem::path checkpoint;
  std::function<void(const ImputeSummary&)> on_checkpoint;
};

// Evaluates every Absent cell through the cascade (row-major order) and marks
// verdict-true cells AiImputed. HumanElicited cells are never queried. An
// existing checkpoint for the same input is resumed; one for a different
// input is an error.
ImputeResult impute_matrix(const norms::NormMatrix& m, const CascadeConfig& cfg, RequestLog& log,
                           const ImputeOptions& options = {});

}  // namespace normforge::verifier
