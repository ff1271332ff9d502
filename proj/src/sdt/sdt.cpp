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

#include "sdt/sdt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"

namespace normforge::sdt {

JudgmentSet load_judgments(const std::filesystem::path& path) {
  JudgmentSet set;
  std::unordered_map<std::string, int> concept_ids;
  std::unordered_map<std::string, int> feature_ids;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto where = path.string() + ":" + std::to_string(line.number) + ": ";
    auto f = text::split(line.text, '\t');
    if (f.size() != 4) {
      fail(ErrorCode::Parse, where + "expected participant<TAB>concept<TAB>feature<TAB>response");
    }
    std::string participant = text::trim(f[0]);
    std::string concept_label = text::trim(f[1]);
    std::string feature = text::trim(f[2]);
    std::string answer = text::casefold(text::trim(f[3]));
    if (participant.empty() || concept_label.empty() || feature.empty()) {
      fail(ErrorCode::Parse, where + "empty field");
    }
    JudgmentRecord r;
    if (answer == "true") {
      r.response = Response::True;
    } else if (answer == "false") {
      r.response = Response::False;
    } else if (answer == "skip") {
      r.response = Response::Skipped;
    } else {
      fail(ErrorCode::Parse, where + "response must be true, false or skip, got '" + f[3] + "'");
    }
    auto [ci, new_concept] =
        concept_ids.try_emplace(text::casefold(concept_label), static_cast<int>(set.concepts.size()));
    if (new_concept) set.concepts.push_back(concept_label);
    auto [fi, new_feature] = feature_ids.try_emplace(feature, static_cast<int>(set.features.size()));
    if (new_feature) set.features.push_back(feature);
    r.participant = std::move(participant);
    r.concept_id = ci->second;
    r.feature_id = fi->second;
    set.records.push_back(std::move(r));
  }
  return set;
}

std::vector<GoldLabel> select_gold(const std::vector<JudgmentRecord>& records, int min_judgments) {
  struct Tally {
    int yes = 0;
    int no = 0;
  };
  std::map<PairKey, Tally> tallies;
  for (const auto& r : records) {
    if (r.response == Response::Skipped) continue;
    auto& t = tallies[{r.concept_id, r.feature_id}];
    (r.response == Response::True ? t.yes : t.no) += 1;
  }
  std::vector<GoldLabel> gold;
  for (const auto& [key, t] : tallies) {
    const int n = t.yes + t.no;
    if (n < min_judgments || (t.yes > 0 && t.no > 0)) continue;
    gold.push_back({key.first, key.second, t.yes > 0, n});
  }
  return gold;
}

ConfusionCounts confusion(const std::vector<GoldLabel>& gold, const Predictions& preds) {
  ConfusionCounts c;
  for (const auto& g : gold) {
    auto it = preds.find(g.key());
    if (it == preds.end()) {
      fail(ErrorCode::InvalidArgument, "no prediction for pair (" + std::to_string(g.concept_id) +
                                           ", " + std::to_string(g.feature_id) + ")");
    }
    if (g.label) {
      (it->second ? c.hits : c.misses) += 1;
    } else {
      (it->second ? c.false_alarms : c.correct_rejections) += 1;
    }
  }
  return c;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::InvalidArgument, "probit: p must lie strictly between 0 and 1");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0;
  if (p < p_low) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley refinement.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

namespace {

double corrected_rate(std::int64_t k, std::int64_t n) {
  const double half = 1.0 / (2.0 * static_cast<double>(n));
  if (k == 0) return half;
  if (k == n) return 1.0 - half;
  return static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

DPrimeResult d_prime(const ConfusionCounts& c) {
  if (c.hits < 0 || c.misses < 0 || c.false_alarms < 0 || c.correct_rejections < 0) {
    fail(ErrorCode::InvalidArgument, "confusion counts must be non-negative");
  }
  if (c.positives() == 0) fail(ErrorCode::InvalidArgument, "d': no signal trials");
  if (c.negatives() == 0) fail(ErrorCode::InvalidArgument, "d': no noise trials");
  DPrimeResult r;
  r.hit_rate = corrected_rate(c.hits, c.positives());
  r.fa_rate = corrected_rate(c.false_alarms, c.negatives());
  r.d_prime = probit(r.hit_rate) - probit(r.fa_rate);
  return r;
}

double d_prime_lenient(const ConfusionCounts& c) {
  const double hr = corrected_rate(c.hits, std::max<std::int64_t>(1, c.positives()));
  const double far = corrected_rate(c.false_alarms, std::max<std::int64_t>(1, c.negatives()));
  return probit(hr) - probit(far);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapInterval bootstrap_ci(const std::vector<GoldLabel>& gold, const Predictions& preds,
                               int resamples, std::uint64_t seed) {
  if (resamples < 1) fail(ErrorCode::InvalidArgument, "bootstrap needs at least one resample");
  if (gold.empty()) fail(ErrorCode::InvalidArgument, "bootstrap over an empty gold set");
  // Outcome class per gold item: 0 hit, 1 miss, 2 false alarm, 3 correct rejection.
  std::vector<int> outcome;
  outcome.reserve(gold.size());
  for (const auto& g : gold) {
    auto it = preds.find(g.key());
    if (it == preds.end()) {
      fail(ErrorCode::InvalidArgument, "no prediction for pair (" + std::to_string(g.concept_id) +
                                           ", " + std::to_string(g.feature_id) + ")");
    }
    outcome.push_back(g.label ? (it->second ? 0 : 1) : (it->second ? 2 : 3));
  }
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  const std::uint64_t n = outcome.size();
  for (int b = 0; b < resamples; ++b) {
    rng::Engine engine = rng::stream(seed, static_cast<std::uint64_t>(b));
    std::int64_t tally[4] = {0, 0, 0, 0};
    for (std::uint64_t k = 0; k < n; ++k) ++tally[outcome[rng::bounded(engine, n)]];
    stats.push_back(d_prime_lenient({tally[0], tally[1], tally[2], tally[3]}));
  }
  return {percentile(stats, 0.025), percentile(stats, 0.975)};
}

}  // namespace normforge::sdt
