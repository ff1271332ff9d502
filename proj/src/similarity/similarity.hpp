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

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "norms/norm_matrix.hpp"

namespace normforge::similarity {

struct DissimilarityMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd d;  // symmetric, zero diagonal

  std::size_t size() const { return labels.size(); }
};

// d[i][j] = 1 - cos(x_i, x_j) over the rows of the chosen view. Every row
// must have at least one set cell.
DissimilarityMatrix cosine_dissim(const norms::NormMatrix& m, norms::View view);
// Same over dense row vectors; rows must be non-zero.
DissimilarityMatrix cosine_dissim(const Eigen::MatrixXd& rows, std::vector<std::string> labels);

// CSV with a label column and one column per concept.
std::string to_csv(const DissimilarityMatrix& m);
DissimilarityMatrix dissim_from_csv(const std::string& csv, const std::string& origin = "<csv>");
void save_dissim(const DissimilarityMatrix& m, const std::filesystem::path& path);
DissimilarityMatrix load_dissim(const std::filesystem::path& path);

struct ProcrustesResult {
  Eigen::MatrixXd rotation;   // orthogonal
  double scale = 0;           // optimal scaling of the standardized b
  double disparity = 0;       // ||a_std - aligned_b||_F^2, in [0, 1]
  Eigen::MatrixXd a_std;
  Eigen::MatrixXd aligned_b;  // b_std * rotation * scale
  Eigen::Index rank = 0;      // numerical rank of b_std^T a_std
  bool degenerate = false;    // a configuration collapsed to a point
};

// Rows of each matrix are points. Both configurations are column-centred and
// scaled to unit Frobenius norm; rotation = U V^T from the SVD
// b_std^T a_std = U S V^T, scale = trace(S).
ProcrustesResult procrustes(const DissimilarityMatrix& a, const DissimilarityMatrix& b);
ProcrustesResult procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct Discrepancy {
  std::string label;
  std::size_t index = 0;
  double score = 0;
};

// Row-wise residual norm between a_std and aligned_b, descending; ties by
// label.
std::vector<Discrepancy> rank_discrepant(const DissimilarityMatrix& a,
                                         const ProcrustesResult& result);

enum class Choice { A, B, Tie };
const char* to_string(Choice c);

struct Triplet {
  std::size_t target = 0;
  std::size_t opt_a = 0;
  std::size_t opt_b = 0;
  double score = 0;                          // min(|delta_a|, |delta_b|)
  bool filled = false;                       // added by the fill step, beyond per_target
  std::map<std::string, Choice> pred_by_space;
};

struct MiningConfig {
  std::size_t n_triplets = 1424;
  std::size_t per_target = 2;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  std::string space_a = "a";
  std::string space_b = "b";
};

struct MiningResult {
  std::vector<Triplet> triplets;
  std::vector<std::string> warnings;
};

// For every target t, option pairs (x, y) on which the two spaces disagree:
// sign(a[t][x] - a[t][y]) != sign(b[t][x] - b[t][y]) with both differences
// above epsilon. Each target keeps its per_target best-scoring pairs; the
// pooled selection is then cut (or filled from the best remaining candidates)
// to n_triplets. No two triplets share the same set of three concepts. The
// final order and the A/B placement of the options are shuffled from seed.
MiningResult mine_triplets(const DissimilarityMatrix& a, const DissimilarityMatrix& b,
                           const MiningConfig& cfg);

// The choice a space predicts: the option closer to the target.
Choice predict(const Eigen::MatrixXd& d, std::size_t target, std::size_t opt_a, std::size_t opt_b);

// Line records `target TAB optA TAB optB TAB score TAB pred_first TAB
// pred_second` under a '#' header naming both spaces.
std::string triplets_to_tsv(const std::vector<std::string>& labels, const MiningResult& r,
                            const MiningConfig& cfg);

struct TsneConfig {
  double perplexity = 30;
  int iterations = 1000;
  double learning_rate = 200;
  double early_exaggeration = 12;
  std::uint64_t seed = 0;
};

struct TsneResult {
  Eigen::MatrixXd coords;  // N x 2
  double initial_kl = 0;
  double final_kl = 0;
};

// Exact t-SNE on squared Euclidean distances. Early exaggeration and momentum
// 0.5 for the first quarter of the iterations, then momentum 0.8; per-
// coordinate adaptive gains. Requires N > 3 * perplexity.
TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& cfg);
TsneResult tsne_embed(const norms::NormMatrix& m, norms::View view, const TsneConfig& cfg);

std::string tsne_to_csv(const std::vector<std::string>& labels, const TsneResult& r);

}  // namespace normforge::similarity
