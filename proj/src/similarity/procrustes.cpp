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

#include "common/error.hpp"
#include "similarity/similarity.hpp"

namespace normforge::similarity {

namespace {

// Column-centre and scale to unit Frobenius norm. Returns false when the
// configuration has no spread.
bool standardize(Eigen::MatrixXd& x) {
  x.rowwise() -= x.colwise().mean();
  const double norm = x.norm();
  if (norm == 0.0) return false;
  x /= norm;
  return true;
}

}  // namespace

ProcrustesResult procrustes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::InvalidArgument, "procrustes: configurations differ in shape");
  }
  if (a.rows() < 2) fail(ErrorCode::InvalidArgument, "procrustes: need at least two points");

  ProcrustesResult r;
  r.a_std = a;
  Eigen::MatrixXd b_std = b;
  const bool a_ok = standardize(r.a_std);
  const bool b_ok = standardize(b_std);
  r.degenerate = !a_ok || !b_ok;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b_std.transpose() * r.a_std,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  r.rotation = svd.matrixU() * svd.matrixV().transpose();
  r.scale = svd.singularValues().sum();
  svd.setThreshold(1e-12);
  r.rank = svd.rank();
  r.aligned_b = b_std * r.rotation * r.scale;
  r.disparity = (r.a_std - r.aligned_b).squaredNorm();
  return r;
}

ProcrustesResult procrustes(const DissimilarityMatrix& a, const DissimilarityMatrix& b) {
  if (a.labels != b.labels) {
    fail(ErrorCode::InvalidArgument, "procrustes: matrices must share labels in the same order");
  }
  return procrustes(a.d, b.d);
}

std::vector<Discrepancy> rank_discrepant(const DissimilarityMatrix& a,
                                         const ProcrustesResult& result) {
  if (static_cast<std::size_t>(result.a_std.rows()) != a.size()) {
    fail(ErrorCode::InvalidArgument, "rank_discrepant: result does not match the labels");
  }
  std::vector<Discrepancy> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out.push_back({a.labels[i], i, (result.a_std.row(row) - result.aligned_b.row(row)).norm()});
  }
  std::sort(out.begin(), out.end(), [](const Discrepancy& x, const Discrepancy& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.label < y.label;
  });
  return out;
}

}  // namespace normforge::similarity
