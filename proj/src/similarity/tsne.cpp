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

#include <cmath>
#include <limits>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "similarity/similarity.hpp"

namespace normforge::similarity {

namespace {

// Row-conditional affinities with the Gaussian precision of each row chosen
// by bisection so that the row entropy equals log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& sq_dist, double perplexity) {
  const Eigen::Index n = sq_dist.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * sq_dist(i, j));
        sum += row(j);
        weighted += row(j) * sq_dist(i, j);
      }
      if (sum <= 0.0) {
        // Every neighbour underflowed: the kernel is far too narrow.
        hi = beta;
        beta = (lo + hi) / 2;
        continue;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      row /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
      } else {
        hi = beta;
        beta = (lo + beta) / 2;
      }
    }
    p.row(i) = row;
  }
  return p;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd num(n, n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      num(i, j) = i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      z += num(i, j);
    }
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(num(i, j) / z, 1e-300);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

}  // namespace

TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (!(cfg.perplexity > 0) || !(static_cast<double>(n) > 3.0 * cfg.perplexity)) {
    fail(ErrorCode::InvalidArgument, "perplexity " + text::format_double(cfg.perplexity) +
                                         " is infeasible for " + std::to_string(n) +
                                         " points (need N > 3 * perplexity)");
  }
  if (cfg.iterations < 1) fail(ErrorCode::InvalidArgument, "t-SNE needs at least one iteration");

  Eigen::MatrixXd sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sq(i, j) = (points.row(i) - points.row(j)).squaredNorm();
  }
  Eigen::MatrixXd p = conditional_affinities(sq, cfg.perplexity);
  p = (p + p.transpose().eval()) / (2.0 * static_cast<double>(n));
  p = p.array().max(1e-12).matrix();
  p.diagonal().setZero();

  rng::Engine engine(cfg.seed);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = 1e-4 * rng::normal(engine);
    y(i, 1) = 1e-4 * rng::normal(engine);
  }

  TsneResult result;
  result.initial_kl = kl_divergence(p, y);

  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd grad(n, 2);
  Eigen::MatrixXd num(n, n);
  const int early = cfg.iterations / 4;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < early ? cfg.early_exaggeration : 1.0;
    const double momentum = iter < early ? 0.5 : 0.8;

    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = v;
        num(j, i) = v;
        z += 2 * v;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0.0;
      double gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        gx += w * (y(i, 0) - y(j, 0));
        gy += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (update(i, k) > 0);
        gains(i, k) = same_sign ? std::max(0.01, gains(i, k) * 0.8) : gains(i, k) + 0.2;
        update(i, k) = momentum * update(i, k) - cfg.learning_rate * gains(i, k) * grad(i, k);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();
  }
  result.coords = y;
  result.final_kl = kl_divergence(p, y);
  return result;
}

TsneResult tsne_embed(const norms::NormMatrix& m, norms::View view, const TsneConfig& cfg) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.concept_count()),
                                            static_cast<Eigen::Index>(m.feature_count()));
  for (const auto& c : m.concepts()) {
    for (const auto& [j, p] : m.row(c.id)) {
      if (norms::is_set(p, view)) x(c.id, j) = 1.0;
    }
  }
  return tsne_embed(x, cfg);
}

std::string tsne_to_csv(const std::vector<std::string>& labels, const TsneResult& r) {
  std::ostringstream out;
  out << "label,x,y\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::string label = labels[i];
    if (label.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : label) {
        if (c == '"') q += '"';
        q += c;
      }
      label = q + "\"";
    }
    out << label << ',' << text::format_double(r.coords(row, 0)) << ','
        << text::format_double(r.coords(row, 1)) << '\n';
  }
  return out.str();
}

}  // namespace normforge::similarity
