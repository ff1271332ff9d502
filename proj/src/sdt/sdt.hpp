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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace normforge::sdt {

enum class Response { True, False, Skipped };

struct JudgmentRecord {
  std::string participant;
  int concept_id = 0;
  int feature_id = 0;
  Response response = Response::Skipped;
};

// Judgments plus the label tables their ids refer to. Concept labels are
// matched after trimming and case-folding, feature phrases after trimming.
struct JudgmentSet {
  std::vector<std::string> concepts;
  std::vector<std::string> features;
  std::vector<JudgmentRecord> records;
};

// Line records `participant TAB concept TAB feature TAB {true|false|skip}`;
// blank and '#' lines are skipped.
JudgmentSet load_judgments(const std::filesystem::path& path);

using PairKey = std::pair<int, int>;  // (concept id, feature id)

struct GoldLabel {
  int concept_id = 0;
  int feature_id = 0;
  bool label = false;
  int n_judgments = 0;  // non-skipped judgments behind the label

  PairKey key() const { return {concept_id, feature_id}; }
  bool operator==(const GoldLabel&) const = default;
};

// Pairs with at least min_judgments non-skipped judgments, all identical.
// Skips count toward neither the threshold nor the unanimity check. Sorted by
// (concept id, feature id).
std::vector<GoldLabel> select_gold(const std::vector<JudgmentRecord>& records,
                                   int min_judgments = 5);

struct ConfusionCounts {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t false_alarms = 0;
  std::int64_t correct_rejections = 0;

  std::int64_t positives() const { return hits + misses; }
  std::int64_t negatives() const { return false_alarms + correct_rejections; }
  bool operator==(const ConfusionCounts&) const = default;
};

using Predictions = std::map<PairKey, bool>;

ConfusionCounts confusion(const std::vector<GoldLabel>& gold, const Predictions& preds);

// Standard normal CDF via erfc.
double normal_cdf(double x);

// Inverse standard normal CDF: Acklam's rational approximation followed by one
// Halley step against normal_cdf. Requires 0 < p < 1.
double probit(double p);

struct DPrimeResult {
  double d_prime = 0;
  double hit_rate = 0;  // after correction
  double fa_rate = 0;   // after correction
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

// Rates of exactly 0 or 1 are replaced by 1/(2N) or 1 - 1/(2N), N being the
// number of signal (resp. noise) trials. Requires positives and negatives.
DPrimeResult d_prime(const ConfusionCounts& c);

// Same correction, but a class with no trials gets rate 0.5 (N treated as 1)
// instead of an error. Used for bootstrap resamples.
double d_prime_lenient(const ConfusionCounts& c);

struct BootstrapInterval {
  double low = 0;
  double high = 0;
};

// Percentile bootstrap: B resamples of the gold pairs with replacement,
// resample b drawn from rng::stream(seed, b); returns the 2.5th and 97.5th
// percentiles of d' (linear interpolation between order statistics).
BootstrapInterval bootstrap_ci(const std::vector<GoldLabel>& gold, const Predictions& preds,
                               int resamples = 1000, std::uint64_t seed = 0);

// Percentile with linear interpolation at h = (n-1)q over sorted values.
double percentile(std::vector<double> values, double q);

}  // namespace normforge::sdt
