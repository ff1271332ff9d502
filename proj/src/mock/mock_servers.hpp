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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace normforge::mock {

// Scripted answers for the chat-completions mock, keyed by (model, concept,
// feature). Model "*" matches any model. Concepts compare case-insensitively.
struct ChatScript {
  std::map<std::tuple<std::string, std::string, std::string>, std::string> answers;
  std::string default_answer = "False";

  void add(const std::string& model, const std::string& concept_label, const std::string& feature,
           const std::string& answer);
  std::string answer(const std::string& model, const std::string& concept_label,
                     const std::string& feature) const;
};

// Line records `model TAB concept TAB feature TAB answer`; a `default TAB
// <answer>` line sets the fallback.
ChatScript load_chat_script(const std::filesystem::path& path);

// Pulls (concept, feature) out of the last "Is the property [f] true for [c]?"
// in a prompt. Returns false when there is none.
bool extract_pair(const std::string& prompt, std::string& concept_label, std::string& feature);

class MockChatServer {
 public:
  explicit MockChatServer(ChatScript script);
  ~MockChatServer();

  // Serves POST /v1/chat/completions on a background thread; port 0 picks a
  // free port. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

  std::size_t requests() const;
  std::size_t requests(const std::string& model) const;
  std::vector<std::string> prompts() const;
  // After n more successful replies every request gets HTTP 500.
  void fail_after(std::size_t n);
  void reset_counts();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Embeddings mock. Phrases in the script get their scripted vector; any other
// phrase gets a hashed bag-of-words vector of the same dimension, so phrases
// with the same words in any order embed identically.
struct EmbeddingScript {
  std::size_t dimension = 16;
  std::map<std::string, std::vector<double>> vectors;
};

// Line records `phrase TAB v1,v2,...`; a `dimension TAB D` line sets D.
EmbeddingScript load_embedding_script(const std::filesystem::path& path);

std::vector<double> bag_of_words_vector(const std::string& phrase, std::size_t dimension);

class MockEmbeddingServer {
 public:
  explicit MockEmbeddingServer(EmbeddingScript script);
  ~MockEmbeddingServer();

  // Serves POST /v1/embeddings.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

  std::size_t requests() const;
  std::size_t phrases_embedded() const;
  void reset_counts();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace normforge::mock
