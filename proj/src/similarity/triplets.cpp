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

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "similarity/similarity.hpp"

namespace normforge::similarity {

const char* to_string(Choice c) {
  switch (c) {
    case Choice::A: return "A";
    case Choice::B: return "B";
    case Choice::Tie: return "Tie";
  }
  return "?";
}

Choice predict(const Eigen::MatrixXd& d, std::size_t target, std::size_t opt_a, std::size_t opt_b) {
  const double da = d(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(opt_a));
  const double db = d(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(opt_b));
  if (da < db) return Choice::A;
  if (db < da) return Choice::B;
  return Choice::Tie;
}

namespace {

struct Candidate {
  double score;
  std::size_t t;
  std::size_t x;
  std::size_t y;
  bool filled = false;
};

// Strict weak order: higher score first, then lower (t, x, y).
bool better(const Candidate& p, const Candidate& q) {
  if (p.score != q.score) return p.score > q.score;
  if (p.t != q.t) return p.t < q.t;
  if (p.x != q.x) return p.x < q.x;
  return p.y < q.y;
}

using TripleSet = std::array<std::size_t, 3>;

TripleSet concept_set(const Candidate& c) {
  TripleSet s{c.t, c.x, c.y};
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

MiningResult mine_triplets(const DissimilarityMatrix& a, const DissimilarityMatrix& b,
                           const MiningConfig& cfg) {
  if (a.labels != b.labels) {
    fail(ErrorCode::InvalidArgument, "mine_triplets: spaces must share labels in the same order");
  }
  const std::size_t n = a.size();
  if (n < 3) fail(ErrorCode::InvalidArgument, "mine_triplets: need at least 3 concepts");
  if (cfg.space_a == cfg.space_b) {
    fail(ErrorCode::InvalidArgument, "mine_triplets: space names must differ");
  }

  MiningResult result;
  std::set<TripleSet> used;
  std::vector<Candidate> picked;
  // Best leftovers for the fill step. A picked set can shadow at most two
  // leftovers (the same three concepts under another target) and leftovers
  // can shadow each other the same way, so this capacity always suffices.
  const std::size_t capacity = 3 * (cfg.n_triplets + cfg.per_target * n) + 3;
  auto worse_on_top = [](const Candidate& p, const Candidate& q) { return better(p, q); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse_on_top)> leftovers(
      worse_on_top);

  std::vector<Candidate> cands;
  for (std::size_t t = 0; t < n; ++t) {
    cands.clear();
    const auto ti = static_cast<Eigen::Index>(t);
    for (std::size_t x = 0; x < n; ++x) {
      if (x == t) continue;
      const double ax = a.d(ti, static_cast<Eigen::Index>(x));
      const double bx = b.d(ti, static_cast<Eigen::Index>(x));
      for (std::size_t y = x + 1; y < n; ++y) {
        if (y == t) continue;
        const double da = ax - a.d(ti, static_cast<Eigen::Index>(y));
        const double db = bx - b.d(ti, static_cast<Eigen::Index>(y));
        if (std::abs(da) <= cfg.epsilon || std::abs(db) <= cfg.epsilon) continue;
        if ((da > 0) == (db > 0)) continue;
        cands.push_back({std::min(std::abs(da), std::abs(db)), t, x, y});
      }
    }
    if (cands.empty()) {
      result.warnings.push_back("target '" + a.labels[t] + "' has no disagreeing option pair");
      continue;
    }
    std::sort(cands.begin(), cands.end(), better);
    std::size_t kept = 0;
    for (const auto& c : cands) {
      if (kept < cfg.per_target && used.insert(concept_set(c)).second) {
        picked.push_back(c);
        ++kept;
        continue;
      }
      leftovers.push(c);
      if (leftovers.size() > capacity) leftovers.pop();
    }
  }

  std::sort(picked.begin(), picked.end(), better);
  if (picked.size() > cfg.n_triplets) {
    picked.resize(cfg.n_triplets);
  } else if (picked.size() < cfg.n_triplets) {
    std::vector<Candidate> rest;
    rest.reserve(leftovers.size());
    while (!leftovers.empty()) {
      rest.push_back(leftovers.top());
      leftovers.pop();
    }
    std::sort(rest.begin(), rest.end(), better);
    for (const auto& c : rest) {
      if (picked.size() >= cfg.n_triplets) break;
      if (used.insert(concept_set(c)).second) {
        picked.push_back(c);
        picked.back().filled = true;
      }
    }
  }

  rng::Engine engine(cfg.seed);
  rng::shuffle(picked, engine);
  result.triplets.reserve(picked.size());
  for (const auto& c : picked) {
    Triplet tr;
    tr.target = c.t;
    tr.opt_a = c.x;
    tr.opt_b = c.y;
    if (rng::bounded(engine, 2) == 1) std::swap(tr.opt_a, tr.opt_b);
    tr.score = c.score;
    tr.filled = c.filled;
    tr.pred_by_space[cfg.space_a] = predict(a.d, tr.target, tr.opt_a, tr.opt_b);
    tr.pred_by_space[cfg.space_b] = predict(b.d, tr.target, tr.opt_a, tr.opt_b);
    result.triplets.push_back(std::move(tr));
  }
  return result;
}

std::string triplets_to_tsv(const std::vector<std::string>& labels, const MiningResult& r,
                            const MiningConfig& cfg) {
  std::ostringstream out;
  out << "# target\toptA\toptB\tscore\t" << cfg.space_a << '\t' << cfg.space_b << '\n';
  for (const auto& t : r.triplets) {
    out << text::escape_field(labels[t.target]) << '\t' << text::escape_field(labels[t.opt_a])
        << '\t' << text::escape_field(labels[t.opt_b]) << '\t' << text::format_double(t.score)
        << '\t' << to_string(t.pred_by_space.at(cfg.space_a)) << '\t'
        << to_string(t.pred_by_space.at(cfg.space_b)) << '\n';
  }
  return out.str();
}

}  // namespace normforge::similarity
