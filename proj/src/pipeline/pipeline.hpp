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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pipeline/config.hpp"
#include "pipeline/manifest.hpp"

namespace normforge::pipeline {

struct RunOptions {
  std::filesystem::path out_dir;             // overrides [paths] out
  std::optional<std::uint64_t> seed;         // overrides every stage seed
  std::optional<std::size_t> max_parallel;   // overrides request parallelism
  std::optional<int> port;                   // serve only
  std::filesystem::path data_dir;            // serve only
};

struct StageReport {
  std::string stage;
  bool skipped = false;           // outputs were already up to date
  nlohmann::json details;         // stage-specific summary, may include run counters
};

// Stages in workflow order:
//   reduce          elicitation -> reduced.nm, reduce_report.json
//   eval-verifiers  judgments -> verifier_eval.json
//   impute          reduced.nm -> imputed.nm, impute_summary.json
//   stats           imputed.nm -> stats.json
//   dissim          imputed.nm -> dissim_human.csv, dissim_full.csv
//   procrustes      dissim_*.csv -> procrustes.json, discrepancy.tsv
//   mine-triplets   dissim_*.csv -> triplets.tsv, mining_report.json
//   eval-judgments  triplets.tsv, responses, word vectors -> judgment_report.json
//   tsne            imputed.nm -> tsne_human.csv, tsne_full.csv, tsne.json
// Outputs are staged under <out>/.staging/<stage> and moved into place on
// success; a failed stage leaves its partial outputs in
// <out>/.quarantine/<stage>.
class Pipeline {
 public:
  Pipeline(const std::filesystem::path& config_path, RunOptions options);
  Pipeline(Config config, RunOptions options);

  static const std::vector<std::string>& stage_names();

  StageReport run(const std::string& stage);
  std::vector<StageReport> run_all();
  // Runs the experiment service until the process is stopped.
  void serve();

  const std::filesystem::path& out_dir() const { return out_; }
  const Config& config() const { return config_; }

  // External input files a stage reads (not produced by another stage).
  std::vector<std::pair<std::string, std::filesystem::path>> external_inputs(
      const std::string& stage) const;

 private:
  std::uint64_t seed_for(const std::string& section) const;
  std::size_t parallel_for(const std::string& section, std::size_t fallback) const;
  void preflight(const std::vector<std::string>& stages) const;

  Config config_;
  RunOptions options_;
  std::filesystem::path out_;
};

}  // namespace normforge::pipeline
