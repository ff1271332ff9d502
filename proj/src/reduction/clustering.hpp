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
#include <map>
#include <string>
#include <vector>

#include "norms/norm_matrix.hpp"
#include "reduction/embedding.hpp"

namespace normforge::reduction {

enum class Linkage { Average };

struct ClusterConfig {
  double merge_threshold = 0.1;  // cosine dissimilarity, 0 < tau < 1
  Linkage linkage = Linkage::Average;
  std::size_t sample_size = 8200;
  std::uint64_t seed = 0;
};

void validate(const ClusterConfig& cfg);

// Average-linkage agglomerative clustering under cosine dissimilarity, keeping
// every merge whose linkage distance is <= merge_threshold. Each cluster
// becomes a Feature whose canonical phrase is the member with the highest
// frequency, then the shortest, then the lexicographically smallest.
// Phrases missing from `frequencies` count as 0.
//
// The result depends only on the set of inputs: phrases are processed in
// lexicographic order and features are returned sorted by canonical phrase
// with dense ids.
std::vector<norms::Feature> cluster_phrases(
    const std::vector<PhraseEmbedding>& embeddings, const ClusterConfig& cfg,
    const std::map<std::string, std::size_t>& frequencies = {});

// Lower-level entry point: labels[i] is the cluster of point i, clusters
// numbered by their first point. Vectors are used as given (not re-sorted).
std::vector<int> average_linkage_cut(const std::vector<std::vector<double>>& vectors,
                                     double threshold);

// Uniform sample without replacement, reproducible from cfg.seed:
//   engine = std::mt19937_64(seed)
//   partial Fisher-Yates over positions 0..n-1 using rng::bounded (see
//   common/rng.hpp), first sample_size draws kept
// The picked features keep their original relative order and get new dense
// ids.
std::vector<norms::Feature> sample_features(const std::vector<norms::Feature>& features,
                                            const ClusterConfig& cfg);

}  // namespace normforge::reduction
