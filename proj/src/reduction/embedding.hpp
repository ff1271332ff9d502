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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "common/http_client.hpp"

namespace normforge::reduction {

struct PhraseEmbedding {
  std::string phrase;
  std::vector<double> vector;
};

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual std::string endpoint_id() const = 0;
  // One vector per input, in input order.
  virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& inputs) = 0;
};

// OpenAI-style embeddings endpoint: POST {"model", "input": [...]} and read
// data[k].embedding, ordered by data[k].index.
class HttpEmbeddingClient : public EmbeddingClient {
 public:
  HttpEmbeddingClient(http::Endpoint endpoint, http::RetryPolicy retry)
      : endpoint_(std::move(endpoint)), retry_(retry) {}

  std::string endpoint_id() const override { return endpoint_.id(); }
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& inputs) override;

 private:
  http::Endpoint endpoint_;
  http::RetryPolicy retry_;
};

// Embeddings keyed by (endpoint id, phrase). With a backing file, every new
// entry is appended as `endpoint TAB phrase TAB v1,v2,...`; a partial last
// line left by a crash is ignored on load.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  explicit EmbeddingCache(std::filesystem::path file);

  const std::vector<double>* find(const std::string& endpoint, const std::string& phrase) const;
  void put(const std::string& endpoint, const std::string& phrase, std::vector<double> v);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> entries_;
};

struct EmbedOptions {
  std::size_t batch_size = 64;
  std::size_t max_parallel = 4;
};

// Requires a non-empty list of distinct phrases. Cached phrases are never
// sent; the rest go out in batches, at most max_parallel at a time. Vectors
// must be finite and share one dimension.
std::vector<PhraseEmbedding> embed_phrases(const std::vector<std::string>& phrases,
                                           EmbeddingClient& client, EmbeddingCache& cache,
                                           const EmbedOptions& options = {});

}  // namespace normforge::reduction
