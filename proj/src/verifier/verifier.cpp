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

#include "verifier/verifier.hpp"

#include <unistd.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::verifier {

std::string HttpChatClient::complete(const std::string& prompt) {
  nlohmann::json body = {
      {"model", endpoint_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", max_tokens_},
      {"temperature", temperature_},
  };
  nlohmann::json reply = http::post_json(endpoint_, body, retry_);
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Transport, std::string("malformed chat reply: ") + e.what());
  }
}

std::string cache_key(const std::string& model_id, const PromptTemplate& prompt,
                      const std::string& concept_label, const std::string& feature) {
  std::string blob = model_id;
  for (const std::string& part : {std::string(to_string(prompt.mode)), prompt.exemplars_digest(),
                                  concept_label, feature}) {
    blob += '\x1f';
    blob += part;
  }
  return sha256_hex(blob);
}

// ---- request log ---------------------------------------------------------

RequestLog::RequestLog(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  if (std::filesystem::exists(file_)) {
    std::string data = text::read_file(file_);
    std::size_t complete = data.rfind('\n');
    std::size_t keep = complete == std::string::npos ? 0 : complete + 1;
    for (const auto& line : text::split(std::string_view(data).substr(0, keep), '\n')) {
      if (line.empty()) continue;
      auto f = text::split(line, '\t');
      if (f.size() != 5) {
        fail(ErrorCode::Parse, file_.string() + ": malformed request log record");
      }
      entries_[f[0]] = Entry{text::unescape_field(f[1]), f[2], text::unescape_field(f[3]),
                             f[4] == "true"};
    }
    if (keep != data.size()) std::filesystem::resize_file(file_, keep);
  }
  out_ = std::fopen(file_.c_str(), "ab");
  if (!out_) fail(ErrorCode::Io, "cannot open request log " + file_.string());
}

RequestLog::~RequestLog() {
  if (out_) {
    std::fflush(out_);
    std::fclose(out_);
  }
}

std::optional<RequestLog::Entry> RequestLog::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RequestLog::append(const VerificationRecord& r) {
  std::lock_guard lock(mu_);
  if (out_) {
    std::string line = r.cache_key + '\t' + text::escape_field(r.model_id) + '\t' +
                       to_string(r.mode) + '\t' + text::escape_field(r.raw_text) + '\t' +
                       (r.parsed ? "true" : "false") + '\n';
    if (std::fwrite(line.data(), 1, line.size(), out_) != line.size() || std::fflush(out_) != 0) {
      fail(ErrorCode::Io, "cannot append to request log " + file_.string());
    }
  }
  entries_[r.cache_key] = Entry{r.model_id, to_string(r.mode), r.raw_text, r.parsed};
}

void RequestLog::sync() {
  std::lock_guard lock(mu_);
  if (out_) {
    std::fflush(out_);
    ::fsync(::fileno(out_));
  }
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---- single pair ---------------------------------------------------------

namespace {

std::string describe(const Pair& p) {
  return "(" + p.concept_label + ", " + p.feature + ")";
}

VerificationRecord blank_record(const Pair& pair, const Stage& stage) {
  VerificationRecord r;
  r.concept_id = pair.concept_id;
  r.feature_id = pair.feature_id;
  r.model_id = stage.client->model_id();
  r.mode = stage.prompt.mode;
  r.cache_key = cache_key(r.model_id, stage.prompt, pair.concept_label, pair.feature);
  return r;
}

}  // namespace

std::optional<VerificationRecord> lookup(const Pair& pair, const Stage& stage,
                                         const RequestLog& log) {
  VerificationRecord r = blank_record(pair, stage);
  auto hit = log.find(r.cache_key);
  if (!hit) return std::nullopt;
  r.raw_text = hit->raw_text;
  r.parsed = hit->parsed;
  r.from_cache = true;
  return r;
}

VerificationRecord fetch(const Pair& pair, const Stage& stage) {
  VerificationRecord r = blank_record(pair, stage);
  const std::string prompt = build_prompt(stage.prompt, pair.concept_label, pair.feature);
  try {
    r.raw_text = stage.client->complete(prompt);
  } catch (const Error& e) {
    throw Error(e.code(), "verifying " + describe(pair) + " with " + r.model_id + ": " + e.what());
  }
  r.parsed = parse_response(r.raw_text);
  return r;
}

VerificationRecord verify_pair(const Pair& pair, const Stage& stage, RequestLog& log) {
  if (auto hit = lookup(pair, stage, log)) return *hit;
  VerificationRecord r = fetch(pair, stage);
  log.append(r);
  return r;
}

void validate(const CascadeConfig& cfg) {
  if (!cfg.stage1.client || !cfg.stage2.client) {
    fail(ErrorCode::InvalidArgument, "cascade needs two configured stages");
  }
  validate(cfg.stage1.prompt);
  validate(cfg.stage2.prompt);
  if (cfg.max_parallel == 0) fail(ErrorCode::InvalidArgument, "max_parallel must be positive");
  if (cfg.checkpoint_every == 0) {
    fail(ErrorCode::InvalidArgument, "checkpoint_every must be positive");
  }
}

CascadeOutcome run_cascade(const Pair& pair, const CascadeConfig& cfg, RequestLog& log) {
  CascadeOutcome out;
  out.stage1 = verify_pair(pair, cfg.stage1, log);
  if (!out.stage1.parsed) return out;
  out.stage2 = verify_pair(pair, cfg.stage2, log);
  out.verdict = out.stage2->parsed;
  return out;
}

// ---- batches -------------------------------------------------------------

std::vector<VerificationRecord> verify_batch(const std::vector<Pair>& pairs, const Stage& stage,
                                             RequestLog& log, std::size_t max_parallel) {
  std::vector<std::optional<VerificationRecord>> results(pairs.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    results[i] = lookup(pairs[i], stage, log);
    if (!results[i]) misses.push_back(i);
  }

  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= misses.size()) return;
      std::size_t i = misses[k];
      try {
        results[i] = fetch(pairs[i], stage);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min(std::max<std::size_t>(1, max_parallel), misses.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::exception_ptr first_error;
  for (std::size_t i : misses) {
    if (errors[i]) {
      if (!first_error) first_error = errors[i];
      continue;
    }
    log.append(*results[i]);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<VerificationRecord> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

// ---- imputation ----------------------------------------------------------

namespace {

constexpr const char* kCheckpointTag = "impute-checkpoint";

struct Checkpoint {
  std::size_t decided = 0;
  std::size_t stage1_true = 0;
  std::size_t stage2_queries = 0;
  norms::NormMatrix matrix;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ostringstream out;
  out << kCheckpointTag << " v1 " << c.decided << ' ' << c.stage1_true << ' '
      << c.stage2_queries << '\n'
      << norms::serialize_matrix(c.matrix);
  text::write_file_atomic(path, out.str());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::string data = text::read_file(path);
  auto nl = data.find('\n');
  auto head = text::split_whitespace(data.substr(0, nl));
  if (nl == std::string::npos || head.size() != 5 || head[0] != kCheckpointTag || head[1] != "v1") {
    fail(ErrorCode::Parse, path.string() + ": not an imputation checkpoint");
  }
  Checkpoint c;
  c.decided = static_cast<std::size_t>(text::parse_int(head[2]));
  c.stage1_true = static_cast<std::size_t>(text::parse_int(head[3]));
  c.stage2_queries = static_cast<std::size_t>(text::parse_int(head[4]));
  c.matrix = norms::parse_matrix(data.substr(nl + 1), path.string());
  return c;
}

}  // namespace

ImputeResult impute_matrix(const norms::NormMatrix& m, const CascadeConfig& cfg, RequestLog& log,
                           const ImputeOptions& options) {
  validate(cfg);
  std::vector<Pair> absent;
  for (const auto& c : m.concepts()) {
    for (const auto& f : m.features()) {
      if (m.get(c.id, f.id) == norms::Provenance::Absent) {
        absent.push_back({c.id, f.id, c.label, f.phrase});
      }
    }
  }

  Checkpoint state{0, 0, 0, m};
  ImputeSummary summary;
  summary.absent_cells = absent.size();
  if (!options.checkpoint.empty() && std::filesystem::exists(options.checkpoint)) {
    Checkpoint saved = read_checkpoint(options.checkpoint);
    if (saved.matrix.concepts() != m.concepts() || saved.matrix.features() != m.features() ||
        saved.matrix.human_only() != m.human_only() || saved.decided > absent.size()) {
      fail(ErrorCode::State, options.checkpoint.string() +
                                 " belongs to a different input matrix; remove it to start over");
    }
    state = std::move(saved);
    summary.resumed = true;
  }

  auto report = [&] {
    summary.decided = state.decided;
    summary.stage1_true = state.stage1_true;
    summary.stage2_queries = state.stage2_queries;
    summary.final_true = state.matrix.count(norms::Provenance::AiImputed);
  };

  const std::size_t step = cfg.checkpoint_every;
  for (std::size_t begin = state.decided; begin < absent.size(); begin += step) {
    const std::size_t end = std::min(absent.size(), begin + step);
    std::vector<Pair> chunk(absent.begin() + static_cast<std::ptrdiff_t>(begin),
                            absent.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<Pair> second;
    std::vector<VerificationRecord> first_records;
    std::vector<VerificationRecord> second_records;
    try {
      first_records = verify_batch(chunk, cfg.stage1, log, cfg.max_parallel);
      for (std::size_t k = 0; k < chunk.size(); ++k) {
        if (first_records[k].parsed) second.push_back(chunk[k]);
      }
      second_records = verify_batch(second, cfg.stage2, log, cfg.max_parallel);
    } catch (...) {
      log.sync();
      if (!options.checkpoint.empty()) write_checkpoint(options.checkpoint, state);
      throw;
    }
    for (const auto& r : first_records) {
      (r.from_cache ? summary.cache_hits : summary.stage1_requests) += 1;
    }
    for (const auto& r : second_records) {
      (r.from_cache ? summary.cache_hits : summary.stage2_requests) += 1;
      if (r.parsed) state.matrix.set(r.concept_id, r.feature_id, norms::Provenance::AiImputed);
    }
    state.stage1_true += second.size();
    state.stage2_queries += second_records.size();
    state.decided = end;

    log.sync();
    if (!options.checkpoint.empty() && end < absent.size()) {
      write_checkpoint(options.checkpoint, state);
    }
    report();
    if (options.on_checkpoint) options.on_checkpoint(summary);
  }

  if (!options.checkpoint.empty()) {
    std::error_code ec;
    std::filesystem::remove(options.checkpoint, ec);
  }
  report();
  return {std::move(state.matrix), summary};
}

}  // namespace normforge::verifier
