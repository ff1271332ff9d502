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
#include <numeric>

#include "common/error.hpp"
#include "norms/norm_matrix.hpp"

namespace normforge::norms {

namespace {

double mean_of(const std::vector<std::size_t>& v) {
  if (v.empty()) return 0.0;
  return static_cast<double>(std::accumulate(v.begin(), v.end(), std::size_t{0})) /
         static_cast<double>(v.size());
}

double median_of(std::vector<std::size_t> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return static_cast<double>(v[n / 2]);
  return 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DensityStats feature_density_stats(const NormMatrix& m, View view) {
  if (m.concept_count() == 0) fail(ErrorCode::InvalidArgument, "matrix has no concepts");
  DensityStats s;
  s.per_concept.reserve(m.concept_count());
  for (const auto& c : m.concepts()) {
    std::size_t n = 0;
    for (const auto& cell : m.row(c.id)) n += is_set(cell.second, view) ? 1 : 0;
    s.per_concept.push_back(n);
  }
  s.mean = mean_of(s.per_concept);
  s.median = median_of(s.per_concept);
  s.histogram.assign(*std::max_element(s.per_concept.begin(), s.per_concept.end()) + 1, 0);
  for (auto n : s.per_concept) ++s.histogram[n];
  return s;
}

OverlapStats feature_overlap_stats(const NormMatrix& m, View view) {
  if (m.feature_count() == 0) fail(ErrorCode::InvalidArgument, "matrix has no features");
  OverlapStats s;
  s.per_feature.assign(m.feature_count(), 0);
  for (const auto& c : m.concepts()) {
    for (const auto& [j, p] : m.row(c.id)) {
      if (is_set(p, view)) ++s.per_feature[static_cast<std::size_t>(j)];
    }
  }
  s.mean = mean_of(s.per_feature);
  s.singleton_features = static_cast<std::size_t>(
      std::count(s.per_feature.begin(), s.per_feature.end(), std::size_t{1}));
  s.singleton_fraction =
      static_cast<double>(s.singleton_features) / static_cast<double>(m.feature_count());
  return s;
}

}  // namespace normforge::norms
