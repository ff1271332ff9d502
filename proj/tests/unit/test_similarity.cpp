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
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "checks.hpp"
#include "fixture.hpp"
#include "oracles.hpp"
#include "similarity/similarity.hpp"
#include "support.hpp"

using namespace normforge;
using namespace normforge::similarity;
using normforge::norms::View;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = u(gen);
  }
  return m;
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(n, n);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(gen);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ();
}

DissimilarityMatrix dm(Eigen::MatrixXd d) {
  return {names(std::size_t(d.rows())), std::move(d)};
}

Eigen::MatrixXd dense(const norms::NormMatrix& m, View view) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(m.concept_count()),
                                              Eigen::Index(m.feature_count()));
  for (const auto& c : m.concepts())
    for (const auto& f : m.features())
      if (m.value(c.id, f.id, view)) out(c.id, f.id) = 1;
  return out;
}

}  // namespace

TEST_SUITE("similarity") {

TEST_CASE("cosine dissimilarity examples") {
  Eigen::MatrixXd rows(3, 3);
  rows << 1, 1, 0,  //
      1, 0, 0,      //
      0, 0, 1;
  auto d = cosine_dissim(rows, {"x", "y", "z"});
  CHECK(d.d(0, 0) == 0);
  CHECK(std::fabs(d.d(0, 1) - (1 - 1 / std::sqrt(2.0))) < 1e-12);
  CHECK(std::fabs(d.d(0, 1) - 0.2928932) < 1e-7);
  CHECK(d.d(1, 2) == doctest::Approx(1.0));
  CHECK(d.d(0, 1) == d.d(1, 0));

  Eigen::MatrixXd same(2, 2);
  same << 1, 1, 1, 1;
  CHECK(std::fabs(cosine_dissim(same, {"a", "b"}).d(0, 1)) < 1e-15);

  Eigen::MatrixXd zero(2, 2);
  zero << 1, 0, 0, 0;
  CHECK_FAILS_WITH(cosine_dissim(zero, {"a", "hollow"}), ErrorCode::InvalidArgument);
  CHECK_FAILS_WITH(cosine_dissim(same, {"a"}), ErrorCode::InvalidArgument);
}

TEST_CASE("cosine dissimilarity from a norm matrix") {
  auto m = nftest::full_matrix();
  for (View view : {View::HumanOnly, View::Full}) {
    auto x = dense(m, view);
    auto d = cosine_dissim(m, view);
    REQUIRE(d.size() == m.concept_count());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      CHECK(d.d(i, i) == 0);
      for (Eigen::Index j = 0; j < x.rows(); ++j) {
        const double want = 1 - x.row(i).dot(x.row(j)) / (x.row(i).norm() * x.row(j).norm());
        CHECK(std::fabs(d.d(i, j) - want) < 1e-12);
        CHECK(d.d(i, j) >= 0);
        CHECK(d.d(i, j) <= 1 + 1e-12);
        CHECK(d.d(i, j) == d.d(j, i));
      }
    }
  }
  norms::NormMatrix empty_row({{0, "dog"}, {1, "rock"}}, {{0, "barks", {"barks"}}});
  empty_row.set(0, 0, norms::Provenance::HumanElicited);
  try {
    cosine_dissim(empty_row, View::Full);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("rock") != std::string::npos);
  }
}

TEST_CASE("cosine dissimilarity ignores positive row scaling") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(8, 5, [&] { return u(gen); });
  auto base = cosine_dissim(x, names(8));
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) *= u(gen) * 10;
  CHECK((cosine_dissim(x, names(8)).d - base.d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dissimilarity csv round trip") {
  auto d = cosine_dissim(nftest::full_matrix(), View::Full);
  auto back = dissim_from_csv(to_csv(d));
  CHECK(back.labels == d.labels);
  CHECK((back.d - d.d).cwiseAbs().maxCoeff() == 0);
  DissimilarityMatrix odd{{"fire, truck", "say \"hi\""}, Eigen::MatrixXd::Zero(2, 2)};
  odd.d(0, 1) = odd.d(1, 0) = 0.25;
  auto back2 = dissim_from_csv(to_csv(odd));
  CHECK(back2.labels == odd.labels);
  CHECK_FAILS_WITH(dissim_from_csv(""), ErrorCode::Parse);
  CHECK_FAILS_WITH(dissim_from_csv("name,a\na,0\n"), ErrorCode::Parse);
}

TEST_CASE("procrustes on identical and rotated configurations") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 4 + t % 6;
    Eigen::MatrixXd a = random_symmetric(gen, n);
    auto same = procrustes(a, a);
    CHECK(same.disparity < 1e-12);
    CHECK((same.aligned_b - same.a_std).cwiseAbs().maxCoeff() < 1e-10);
    // centred rows span n-1 dimensions, so only the action on them is fixed
    CHECK((same.a_std * same.rotation - same.a_std).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd q = random_orthogonal(gen, n);
    auto r = procrustes(a, (a * q).eval());
    CHECK(r.disparity < 1e-10);
    CHECK((r.rotation.transpose() * r.rotation - Eigen::MatrixXd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
  }
}

TEST_CASE("procrustes disparity matches the brute-force optimiser") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 5; ++t) {
    auto a = random_symmetric(gen, 6), b = random_symmetric(gen, 6);
    auto r = procrustes(dm(a), dm(b));
    CHECK(std::fabs(r.disparity - oracle::procrustes_disparity(a, b)) < 1e-6);
    // definition on the type
    CHECK(std::fabs(r.disparity - (r.a_std - r.aligned_b).squaredNorm()) < 1e-10);
    CHECK(r.disparity >= 0);
    CHECK(r.disparity <= 1);
    CHECK(std::fabs(procrustes(dm(b), dm(a)).disparity - r.disparity) < 1e-8);
    CHECK((r.rotation.transpose() * r.rotation - Eigen::MatrixXd::Identity(6, 6))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    CHECK(std::fabs(r.a_std.norm() - 1) < 1e-12);
  }
}

TEST_CASE("procrustes errors and degenerate input") {
  auto a = dm(Eigen::MatrixXd::Identity(3, 3));
  auto b = a;
  b.labels[2] = "other";
  CHECK_FAILS_WITH(procrustes(a, b), ErrorCode::InvalidArgument);
  CHECK_FAILS_WITH(procrustes(Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Ones(1, 2)),
                   ErrorCode::InvalidArgument);
  CHECK_FAILS_WITH(procrustes(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 3)),
                   ErrorCode::InvalidArgument);
  auto flat = procrustes(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Ones(3, 3));
  CHECK(flat.degenerate);
  CHECK(std::isfinite(flat.disparity));
}

TEST_CASE("discrepancy ranking") {
  std::mt19937_64 gen(4);
  auto a = random_symmetric(gen, 8);
  auto same = rank_discrepant(dm(a), procrustes(dm(a), dm(a)));
  for (const auto& d : same) CHECK(d.score < 1e-10);

  for (std::size_t victim = 0; victim < 8; ++victim) {
    Eigen::MatrixXd b = a;
    const auto v = Eigen::Index(victim);
    for (Eigen::Index j = 0; j < 8; ++j) {
      if (j == v) continue;
      b(v, j) = b(j, v) = std::fmod(a(v, j) + 0.5, 1.0);
    }
    auto r = procrustes(dm(a), dm(b));
    auto ranked = rank_discrepant(dm(a), r);
    REQUIRE(ranked.size() == 8);
    CHECK(ranked.front().index == victim);
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      const auto i = Eigen::Index(ranked[k].index);
      CHECK(std::fabs(ranked[k].score - (r.a_std.row(i) - r.aligned_b.row(i)).norm()) < 1e-12);
      if (k) CHECK(ranked[k - 1].score >= ranked[k].score);
    }
  }
}

TEST_CASE("fixture discrepancy order matches brute-force residuals") {
  auto m = nftest::full_matrix();
  auto h = cosine_dissim(m, View::HumanOnly), f = cosine_dissim(m, View::Full);
  auto r = procrustes(h, f);
  auto ranked = rank_discrepant(h, r);
  std::vector<std::pair<double, std::string>> brute;
  for (Eigen::Index i = 0; i < r.a_std.rows(); ++i) {
    brute.push_back({-(r.a_std.row(i) - r.aligned_b.row(i)).norm(), h.labels[std::size_t(i)]});
  }
  std::sort(brute.begin(), brute.end());
  REQUIRE(ranked.size() == brute.size());
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    CHECK(std::fabs(ranked[k].score + brute[k].first) < 1e-12);
    CHECK(ranked[k].label == brute[k].second);
  }
}

TEST_CASE("mining equal spaces finds nothing") {
  std::mt19937_64 gen(5);
  auto a = dm(random_symmetric(gen, 7));
  MiningConfig cfg;
  cfg.n_triplets = 10;
  auto r = mine_triplets(a, a, cfg);
  CHECK(r.triplets.empty());
  CHECK(r.warnings.size() == 7);
}

TEST_CASE("one engineered sign flip") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(4, 4, 0.9);
  a.diagonal().setZero();
  a(0, 1) = a(1, 0) = 0.3;
  a(0, 2) = a(2, 0) = 0.4;
  Eigen::MatrixXd b = a;
  b(0, 1) = b(1, 0) = 0.5;
  auto flips = oracle::all_flips(a, b, 1e-6);
  REQUIRE(flips.size() == 1);
  CHECK(flips[0].t == 0);
  CHECK(flips[0].x == 1);
  CHECK(flips[0].y == 2);

  MiningConfig cfg;
  cfg.n_triplets = 5;
  auto r = mine_triplets(dm(a), dm(b), cfg);
  REQUIRE(r.triplets.size() == 1);
  const auto& t = r.triplets[0];
  CHECK(t.target == 0);
  CHECK(std::set<std::size_t>{t.opt_a, t.opt_b} == std::set<std::size_t>{1, 2});
  CHECK(t.score == doctest::Approx(0.1));
  CHECK(t.pred_by_space.at("a") != t.pred_by_space.at("b"));
  CHECK(r.warnings.size() == 3);
}

TEST_CASE("mined triplets satisfy the predicate") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_symmetric(gen, 12), b = random_symmetric(gen, 12);
    MiningConfig cfg;
    cfg.seed = std::uint64_t(trial);
    cfg.per_target = 2;
    cfg.n_triplets = trial % 2 ? 10 : 40;
    auto r = mine_triplets(dm(a), dm(b), cfg);
    CHECK(r.triplets.size() == cfg.n_triplets);
    std::set<std::set<std::size_t>> sets;
    std::map<std::size_t, std::size_t> unfilled_per_target;
    for (const auto& t : r.triplets) {
      CHECK(t.target != t.opt_a);
      CHECK(t.target != t.opt_b);
      CHECK(t.opt_a != t.opt_b);
      const double da = a(Eigen::Index(t.target), Eigen::Index(t.opt_a)) -
                        a(Eigen::Index(t.target), Eigen::Index(t.opt_b));
      const double db = b(Eigen::Index(t.target), Eigen::Index(t.opt_a)) -
                        b(Eigen::Index(t.target), Eigen::Index(t.opt_b));
      CHECK(std::fabs(da) > cfg.epsilon);
      CHECK(std::fabs(db) > cfg.epsilon);
      CHECK((da > 0) != (db > 0));
      CHECK(t.score == doctest::Approx(std::min(std::fabs(da), std::fabs(db))));
      CHECK(t.pred_by_space.at("a") == (da < 0 ? Choice::A : Choice::B));
      CHECK(t.pred_by_space.at("b") == (db < 0 ? Choice::A : Choice::B));
      CHECK(sets.insert({t.target, t.opt_a, t.opt_b}).second);
      if (!t.filled) ++unfilled_per_target[t.target];
    }
    for (const auto& [target, count] : unfilled_per_target) CHECK(count <= cfg.per_target);
    // deterministic under the seed
    auto again = mine_triplets(dm(a), dm(b), cfg);
    REQUIRE(again.triplets.size() == r.triplets.size());
    for (std::size_t k = 0; k < r.triplets.size(); ++k) {
      CHECK(again.triplets[k].target == r.triplets[k].target);
      CHECK(again.triplets[k].opt_a == r.triplets[k].opt_a);
      CHECK(again.triplets[k].opt_b == r.triplets[k].opt_b);
    }
  }
}

TEST_CASE("unbounded mining covers every flip") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_symmetric(gen, 8), b = random_symmetric(gen, 8);
    std::set<std::set<std::size_t>> want;
    for (const auto& f : oracle::all_flips(a, b, 1e-6)) want.insert({f.t, f.x, f.y});
    MiningConfig cfg;
    cfg.per_target = 1000;
    cfg.n_triplets = 100000;
    std::set<std::set<std::size_t>> got;
    for (const auto& t : mine_triplets(dm(a), dm(b), cfg).triplets) {
      got.insert({t.target, t.opt_a, t.opt_b});
    }
    CHECK(got == want);
  }
}

TEST_CASE("fixture mining") {
  const auto e = nftest::expected();
  auto m = nftest::full_matrix();
  auto h = cosine_dissim(m, View::HumanOnly), f = cosine_dissim(m, View::Full);
  MiningConfig cfg;
  cfg.n_triplets = 20;
  cfg.per_target = 2;
  cfg.seed = 7;
  cfg.space_a = "human";
  cfg.space_b = "ai";
  auto r = mine_triplets(h, f, cfg);
  CHECK(r.triplets.size() == e["triplets"].get<std::size_t>());
  std::map<std::size_t, std::size_t> per_target;
  for (const auto& t : r.triplets) {
    CHECK(t.pred_by_space.at("human") != t.pred_by_space.at("ai"));
    if (!t.filled) ++per_target[t.target];
  }
  for (const auto& [target, count] : per_target) CHECK(count <= 2);
  CHECK_FALSE(r.warnings.empty());
  auto tsv = triplets_to_tsv(h.labels, r, cfg);
  CHECK(tsv.rfind("# target\toptA\toptB\tscore\thuman\tai\n", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == long(r.triplets.size() + 1));
}

TEST_CASE("mining errors") {
  auto a = dm(Eigen::MatrixXd::Zero(2, 2));
  CHECK_FAILS_WITH(mine_triplets(a, a, {}), ErrorCode::InvalidArgument);
  auto b = dm(Eigen::MatrixXd::Zero(3, 3));
  auto c = b;
  c.labels[0] = "x";
  CHECK_FAILS_WITH(mine_triplets(b, c, {}), ErrorCode::InvalidArgument);
}

TEST_CASE("t-SNE basics") {
  auto m = nftest::full_matrix();
  TsneConfig cfg;
  cfg.perplexity = 3;
  cfg.iterations = 300;
  cfg.seed = 11;
  auto r = tsne_embed(m, View::Full, cfg);
  CHECK(r.coords.rows() == Eigen::Index(m.concept_count()));
  CHECK(r.coords.cols() == 2);
  CHECK(r.coords.allFinite());
  CHECK(r.final_kl < r.initial_kl);
  CHECK(r.final_kl >= 0);
  auto again = tsne_embed(m, View::Full, cfg);
  CHECK((again.coords.array() == r.coords.array()).all());
  cfg.seed = 12;
  CHECK_FALSE((tsne_embed(m, View::Full, cfg).coords.array() == r.coords.array()).all());

  cfg.perplexity = 4;  // 12 concepts need perplexity below 4
  CHECK_FAILS_WITH(tsne_embed(m, View::Full, cfg), ErrorCode::InvalidArgument);
  cfg.perplexity = 3;
  cfg.iterations = 0;
  CHECK_FAILS_WITH(tsne_embed(m, View::Full, cfg), ErrorCode::InvalidArgument);

  auto csv = tsne_to_csv(cosine_dissim(m, View::Full).labels, r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == long(m.concept_count() + 1));
}

}  // TEST_SUITE
