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

#include "reduction/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::reduction {

std::vector<std::vector<double>> HttpEmbeddingClient::embed_batch(
    const std::vector<std::string>& inputs) {
  nlohmann::json body = {{"model", endpoint_.model}, {"input", inputs}};
  nlohmann::json reply = http::post_json(endpoint_, body, retry_);
  std::vector<std::vector<double>> out(inputs.size());
  std::vector<bool> filled(inputs.size(), false);
  try {
    const auto& data = reply.at("data");
    if (data.size() != inputs.size()) {
      fail(ErrorCode::Transport, "embedding reply has " + std::to_string(data.size()) +
                                     " vectors for " + std::to_string(inputs.size()) + " inputs");
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      std::size_t idx = data[k].contains("index") ? data[k].at("index").get<std::size_t>() : k;
      if (idx >= inputs.size() || filled[idx]) {
        fail(ErrorCode::Transport, "embedding reply has a bad index");
      }
      out[idx] = data[k].at("embedding").get<std::vector<double>>();
      filled[idx] = true;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Transport, std::string("malformed embedding reply: ") + e.what());
  }
  return out;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) return;
  std::string data = text::read_file(file_);
  std::size_t complete = data.rfind('\n');
  if (complete == std::string::npos) return;
  for (const auto& line : text::split(std::string_view(data).substr(0, complete), '\n')) {
    auto fields = text::split(line, '\t');
    if (fields.size() != 3) continue;
    std::vector<double> v;
    for (const auto& x : text::split(fields[2], ',')) v.push_back(text::parse_double(x));
    entries_[{text::unescape_field(fields[0]), text::unescape_field(fields[1])}] = std::move(v);
  }
  if (complete + 1 != data.size()) {
    // Drop the torn tail so later appends start on a fresh line.
    std::filesystem::resize_file(file_, complete + 1);
  }
}

const std::vector<double>* EmbeddingCache::find(const std::string& endpoint,
                                                const std::string& phrase) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find({endpoint, phrase});
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::put(const std::string& endpoint, const std::string& phrase,
                         std::vector<double> v) {
  std::lock_guard lock(mu_);
  if (!file_.empty()) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::app | std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot append to " + file_.string());
    out << text::escape_field(endpoint) << '\t' << text::escape_field(phrase) << '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ',';
      out << text::format_double(v[i]);
    }
    out << '\n';
  }
  entries_[{endpoint, phrase}] = std::move(v);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<PhraseEmbedding> embed_phrases(const std::vector<std::string>& phrases,
                                           EmbeddingClient& client, EmbeddingCache& cache,
                                           const EmbedOptions& options) {
  if (phrases.empty()) fail(ErrorCode::InvalidArgument, "embed_phrases: no phrases");
  std::set<std::string> distinct;
  for (const auto& p : phrases) {
    if (!distinct.insert(p).second) {
      fail(ErrorCode::InvalidArgument, "embed_phrases: duplicate phrase '" + p + "'");
    }
  }

  const std::string endpoint = client.endpoint_id();
  std::vector<std::string> missing;
  for (const auto& p : phrases) {
    if (!cache.find(endpoint, p)) missing.push_back(p);
  }

  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t parallel = std::max<std::size_t>(1, options.max_parallel);
  std::vector<std::vector<std::string>> batches;
  for (std::size_t i = 0; i < missing.size(); i += batch) {
    batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(i),
                         missing.begin() + static_cast<std::ptrdiff_t>(std::min(missing.size(), i + batch)));
  }
  // Waves of at most `parallel` concurrent batches; results are committed in
  // batch order so the cache file is independent of scheduling.
  for (std::size_t w = 0; w < batches.size(); w += parallel) {
    std::vector<std::future<std::vector<std::vector<double>>>> inflight;
    const std::size_t end = std::min(batches.size(), w + parallel);
    for (std::size_t b = w; b < end; ++b) {
      inflight.push_back(std::async(std::launch::async,
                                    [&client, &in = batches[b]] { return client.embed_batch(in); }));
    }
    std::vector<std::vector<std::vector<double>>> results;
    std::exception_ptr first_error;
    for (auto& f : inflight) {
      try {
        results.push_back(f.get());
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
        results.emplace_back();
      }
    }
    for (std::size_t b = w; b < end; ++b) {
      auto& vectors = results[b - w];
      if (vectors.size() != batches[b].size()) continue;
      for (std::size_t k = 0; k < vectors.size(); ++k) {
        cache.put(endpoint, batches[b][k], std::move(vectors[k]));
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<PhraseEmbedding> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) {
    const auto* v = cache.find(endpoint, p);
    if (!v) fail(ErrorCode::State, "embedding for '" + p + "' missing after fetch");
    if (!out.empty() && v->size() != out.front().vector.size()) {
      fail(ErrorCode::Transport, "embedding dimension mismatch: '" + p + "' has " +
                                     std::to_string(v->size()) + ", expected " +
                                     std::to_string(out.front().vector.size()));
    }
    for (double x : *v) {
      if (!std::isfinite(x)) fail(ErrorCode::Transport, "non-finite embedding for '" + p + "'");
    }
    out.push_back({p, *v});
  }
  if (out.front().vector.empty()) fail(ErrorCode::Transport, "embeddings have dimension 0");
  return out;
}

}  // namespace normforge::reduction
