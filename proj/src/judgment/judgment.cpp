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

#include "judgment/judgment.hpp"

#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::judgment {

// ---- word vectors --------------------------------------------------------

WordVectorTable WordVectorTable::load(const std::filesystem::path& path) {
  auto lines = text::read_lines(path);
  if (lines.empty()) fail(ErrorCode::Parse, path.string() + ": empty word-vector file");
  auto header = text::split_whitespace(lines[0].text);
  if (header.size() != 2) {
    fail(ErrorCode::Parse, path.string() + ":1: header must be `vocab_count dimension`");
  }
  const auto count = text::parse_int(header[0]);
  const auto dim = text::parse_int(header[1]);
  if (count < 0 || dim <= 0) fail(ErrorCode::Parse, path.string() + ":1: bad header values");

  WordVectorTable table;
  table.dim_ = static_cast<std::size_t>(dim);
  std::size_t seen = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& line = lines[k];
    auto parts = text::split_whitespace(line.text);
    if (parts.empty()) continue;
    if (parts.size() != table.dim_ + 1) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line.number) + ": expected " +
                                 std::to_string(table.dim_) + " values, got " +
                                 std::to_string(parts.size() - 1));
    }
    std::vector<double> v;
    v.reserve(table.dim_);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      double x = NAN;
      try {
        x = text::parse_double(parts[i]);
      } catch (const Error&) {
      }
      if (!std::isfinite(x)) {
        fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line.number) +
                                   ": bad value '" + parts[i] + "'");
      }
      v.push_back(x);
    }
    table.vectors_[parts[0]] = std::move(v);
    ++seen;
  }
  if (seen != static_cast<std::size_t>(count)) {
    fail(ErrorCode::Parse, path.string() + ": header declares " + std::to_string(count) +
                               " words, file has " + std::to_string(seen));
  }
  return table;
}

const std::vector<double>* WordVectorTable::find(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

void WordVectorTable::add(const std::string& word, std::vector<double> v) {
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_) fail(ErrorCode::InvalidArgument, "vector for '" + word + "' has wrong dimension");
  vectors_[word] = std::move(v);
}

std::vector<double> WordVectorTable::resolve(const std::string& label) const {
  std::string spaced = label;
  for (char& c : spaced) {
    if (c == '_') c = ' ';
  }
  std::vector<double> sum(dim_, 0.0);
  std::size_t found = 0;
  for (const auto& word : text::split_whitespace(spaced)) {
    const auto* v = find(word);
    if (!v) v = find(text::casefold(word));
    if (!v) continue;
    for (std::size_t i = 0; i < dim_; ++i) sum[i] += (*v)[i];
    ++found;
  }
  if (found == 0) fail(ErrorCode::NotFound, "no word vector for concept '" + label + "'");
  for (double& x : sum) x /= static_cast<double>(found);
  return sum;
}

// ---- spaces --------------------------------------------------------------

DissimilaritySpace::DissimilaritySpace(std::string name, similarity::DissimilarityMatrix m)
    : name_(std::move(name)), m_(std::move(m)) {
  for (std::size_t i = 0; i < m_.labels.size(); ++i) {
    index_.emplace(text::casefold(text::trim(m_.labels[i])), i);
  }
}

std::size_t DissimilaritySpace::index(const std::string& label) const {
  auto it = index_.find(text::casefold(text::trim(label)));
  if (it == index_.end()) fail(ErrorCode::NotFound, name_ + " has no concept '" + label + "'");
  return it->second;
}

double DissimilaritySpace::distance(const std::string& x, const std::string& y) const {
  return m_.d(static_cast<Eigen::Index>(index(x)), static_cast<Eigen::Index>(index(y)));
}

double WordVectorSpace::distance(const std::string& x, const std::string& y) const {
  auto vx = table_.resolve(x);
  auto vy = table_.resolve(y);
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < vx.size(); ++i) {
    dot += vx[i] * vy[i];
    nx += vx[i] * vx[i];
    ny += vy[i] * vy[i];
  }
  if (nx == 0 || ny == 0) fail(ErrorCode::Degenerate, "zero word vector in " + name_);
  return 1.0 - dot / std::sqrt(nx * ny);
}

// ---- files ---------------------------------------------------------------

std::vector<LabeledTriplet> load_triplets(const std::filesystem::path& path) {
  std::vector<LabeledTriplet> out;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto f = text::split(line.text, '\t');
    if (f.size() < 3) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line.number) +
                                 ": expected target<TAB>optA<TAB>optB...");
    }
    out.push_back({text::unescape_field(f[0]), text::unescape_field(f[1]),
                   text::unescape_field(f[2])});
  }
  return out;
}

std::vector<TriadResponse> load_responses(const std::filesystem::path& path) {
  std::vector<TriadResponse> out;
  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto where = path.string() + ":" + std::to_string(line.number) + ": ";
    auto f = text::split(line.text, '\t');
    if (f.size() != 3) fail(ErrorCode::Parse, where + "expected participant<TAB>triplet_id<TAB>{A|B}");
    TriadResponse r;
    r.participant = text::trim(f[0]);
    std::int64_t id = 0;
    try {
      id = text::parse_int(f[1]);
    } catch (const Error&) {
      fail(ErrorCode::Parse, where + "bad triplet id '" + f[1] + "'");
    }
    if (id < 0) fail(ErrorCode::Parse, where + "negative triplet id");
    r.triplet_id = static_cast<std::size_t>(id);
    std::string c = text::trim(f[2]);
    if (c == "A" || c == "a") {
      r.choice = Choice::A;
    } else if (c == "B" || c == "b") {
      r.choice = Choice::B;
    } else {
      fail(ErrorCode::Parse, where + "choice must be A or B");
    }
    if (r.participant.empty()) fail(ErrorCode::Parse, where + "empty participant");
    out.push_back(std::move(r));
  }
  return out;
}

// ---- prediction and voting ----------------------------------------------

Choice predict_choice(const Space& space, const LabeledTriplet& t) {
  const double da = space.distance(t.target, t.opt_a);
  const double db = space.distance(t.target, t.opt_b);
  if (da < db) return Choice::A;
  if (db < da) return Choice::B;
  return Choice::Tie;
}

Choice majority_vote(const std::vector<TriadResponse>& responses, std::size_t triplet_id) {
  std::size_t a = 0, b = 0;
  for (const auto& r : responses) {
    if (r.triplet_id != triplet_id) continue;
    (r.choice == Choice::A ? a : b) += 1;
  }
  if (a + b == 0) {
    fail(ErrorCode::NotFound, "no responses for triplet " + std::to_string(triplet_id));
  }
  return a > b ? Choice::A : b > a ? Choice::B : Choice::Tie;
}

std::vector<Choice> majority_votes(const std::vector<TriadResponse>& responses,
                                   std::size_t n_triplets) {
  std::vector<std::pair<std::size_t, std::size_t>> tally(n_triplets, {0, 0});
  for (const auto& r : responses) {
    if (r.triplet_id >= n_triplets) {
      fail(ErrorCode::InvalidArgument, "response for unknown triplet " + std::to_string(r.triplet_id));
    }
    (r.choice == Choice::A ? tally[r.triplet_id].first : tally[r.triplet_id].second) += 1;
  }
  std::vector<Choice> votes;
  votes.reserve(n_triplets);
  for (std::size_t i = 0; i < n_triplets; ++i) {
    auto [a, b] = tally[i];
    if (a + b == 0) fail(ErrorCode::NotFound, "no responses for triplet " + std::to_string(i));
    votes.push_back(a > b ? Choice::A : b > a ? Choice::B : Choice::Tie);
  }
  return votes;
}

AgreementReport agreement(const Space& space, const std::vector<LabeledTriplet>& triplets,
                          const std::vector<Choice>& votes) {
  if (votes.size() != triplets.size()) {
    fail(ErrorCode::InvalidArgument, "votes cover " + std::to_string(votes.size()) + " of " +
                                         std::to_string(triplets.size()) + " triplets");
  }
  AgreementReport r;
  r.space = space.name();
  r.flags.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (votes[i] == Choice::Tie) {
      r.flags.push_back(Flag::VoteTie);
      continue;
    }
    const Choice pred = predict_choice(space, triplets[i]);
    if (pred == Choice::Tie) {
      r.flags.push_back(Flag::PredictionTie);
      continue;
    }
    const bool agree = pred == votes[i];
    r.flags.push_back(agree ? Flag::Agree : Flag::Disagree);
    ++r.n;
    r.k += agree ? 1 : 0;
  }
  if (r.n > 0) {
    r.proportion = static_cast<double>(r.k) / static_cast<double>(r.n);
    r.p_value = binomial_test(static_cast<long long>(r.k), static_cast<long long>(r.n), 0.5);
  }
  return r;
}

// ---- tests ---------------------------------------------------------------

double binomial_test(long long k, long long n, double p0) {
  if (n < 1 || k < 0 || k > n) {
    fail(ErrorCode::InvalidArgument, "binomial_test: need 0 <= k <= n and n >= 1");
  }
  if (!(p0 > 0.0 && p0 < 1.0)) fail(ErrorCode::InvalidArgument, "binomial_test: p0 must be in (0, 1)");
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  const double ln_nfact = std::lgamma(static_cast<double>(n) + 1);
  auto log_pmf = [&](long long i) {
    return ln_nfact - std::lgamma(static_cast<double>(i) + 1) -
           std::lgamma(static_cast<double>(n - i) + 1) + static_cast<double>(i) * lp +
           static_cast<double>(n - i) * lq;
  };
  const double lk = log_pmf(k);
  const double cutoff = lk + std::log1p(1e-7);
  double rel = 0.0;  // sum of pmf(i) / pmf(k) over qualifying i
  for (long long i = 0; i <= n; ++i) {
    const double li = log_pmf(i);
    if (li <= cutoff) rel += std::exp(li - lk);
  }
  return std::min(1.0, std::exp(lk) * rel);
}

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) fail(ErrorCode::InvalidArgument, "incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x)) / a;
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const int m = i / 2;
    double numerator;
    if (i == 0) {
      numerator = 1.0;
    } else if (i % 2 == 0) {
      numerator = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    } else {
      numerator = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1));
    }
    d = 1.0 + numerator * d;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    c = 1.0 + numerator / c;
    if (std::abs(c) < kTiny) c = kTiny;
    const double cd = c * d;
    f *= cd;
    if (std::abs(1.0 - cd) < kEps) return front * (f - 1.0);
  }
  fail(ErrorCode::Degenerate, "incomplete_beta did not converge");
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0)) fail(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "paired_t_test: lengths differ");
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "paired_t_test: need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = (x[i] - y[i]) - mean;
    ss += dev * dev;
  }
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0) fail(ErrorCode::Degenerate, "paired_t_test: differences have zero variance");
  TTestResult r;
  r.df = static_cast<double>(n - 1);
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  r.p_value = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace normforge::judgment
