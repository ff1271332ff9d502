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

#include "reduction/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace normforge::reduction {

void validate(const ClusterConfig& cfg) {
  if (!(cfg.merge_threshold > 0.0 && cfg.merge_threshold < 1.0)) {
    fail(ErrorCode::InvalidArgument, "merge threshold must lie in (0, 1)");
  }
  if (cfg.sample_size == 0) fail(ErrorCode::InvalidArgument, "sample size must be positive");
}

namespace {

// Condensed upper-triangular storage of the working distance matrix.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}
  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return d_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

}  // namespace

std::vector<int> average_linkage_cut(const std::vector<std::vector<double>>& vectors,
                                     double threshold) {
  const std::size_t n = vectors.size();
  if (n == 0) return {};

  std::vector<std::vector<double>> unit(vectors);
  for (auto& v : unit) {
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= norm;
  }
  Condensed d(std::max<std::size_t>(n, 2));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sim = std::inner_product(unit[i].begin(), unit[i].end(), unit[j].begin(), 0.0);
      d.at(i, j) = std::max(0.0, 1.0 - sim);
    }
  }

  // Nearest-neighbour chain. Average linkage is reducible, so merging
  // reciprocal nearest neighbours reproduces the greedy dendrogram. A
  // reciprocal pair farther apart than the threshold can never take part in a
  // merge below it, so both clusters are retired instead of merged.
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::size_t remaining = n;
  std::vector<std::size_t> chain;

  while (remaining > 1) {
    if (chain.empty()) {
      std::size_t first = 0;
      while (!active[first]) ++first;
      chain.push_back(first);
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
    std::size_t b = n;
    double best = std::numeric_limits<double>::infinity();
    if (prev != n) {
      b = prev;
      best = d.at(a, prev);
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      double dc = d.at(a, c);
      if (dc < best) {
        best = dc;
        b = c;
      }
    }
    if (b != prev) {
      chain.push_back(b);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    if (best <= threshold) {
      // Merge b into a (Lance-Williams update for average linkage).
      for (std::size_t c = 0; c < n; ++c) {
        if (!active[c] || c == a || c == b) continue;
        d.at(a, c) = (static_cast<double>(size[a]) * d.at(a, c) +
                      static_cast<double>(size[b]) * d.at(b, c)) /
                     static_cast<double>(size[a] + size[b]);
      }
      size[a] += size[b];
      active[b] = false;
      parent[b] = a;
      --remaining;
    } else {
      active[a] = false;
      active[b] = false;
      remaining -= 2;
    }
  }

  std::vector<int> labels(n, -1);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = i;
    while (parent[r] != r) r = parent[r];
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

std::vector<norms::Feature> cluster_phrases(const std::vector<PhraseEmbedding>& embeddings,
                                            const ClusterConfig& cfg,
                                            const std::map<std::string, std::size_t>& frequencies) {
  validate(cfg);
  if (embeddings.empty()) fail(ErrorCode::InvalidArgument, "cluster_phrases: no embeddings");
  const std::size_t dim = embeddings.front().vector.size();
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) {
      fail(ErrorCode::InvalidArgument, "embedding of '" + e.phrase + "' has dimension " +
                                           std::to_string(e.vector.size()) + ", expected " +
                                           std::to_string(dim));
    }
    double sq = 0;
    for (double x : e.vector) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::InvalidArgument, "embedding of '" + e.phrase + "' is not finite");
      }
      sq += x * x;
    }
    if (sq == 0.0) fail(ErrorCode::InvalidArgument, "embedding of '" + e.phrase + "' has zero norm");
  }

  std::vector<std::size_t> order(embeddings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return embeddings[x].phrase < embeddings[y].phrase;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (embeddings[order[k]].phrase == embeddings[order[k - 1]].phrase) {
      fail(ErrorCode::InvalidArgument, "duplicate phrase '" + embeddings[order[k]].phrase + "'");
    }
  }
  std::vector<std::vector<double>> vectors;
  vectors.reserve(order.size());
  for (auto idx : order) vectors.push_back(embeddings[idx].vector);

  const std::vector<int> labels = average_linkage_cut(vectors, cfg.merge_threshold);
  const int n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(n_clusters));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    groups[static_cast<std::size_t>(labels[k])].push_back(embeddings[order[k]].phrase);
  }

  auto freq = [&](const std::string& p) -> std::size_t {
    auto it = frequencies.find(p);
    return it == frequencies.end() ? 0 : it->second;
  };
  std::vector<norms::Feature> features;
  features.reserve(groups.size());
  for (auto& members : groups) {
    // Members arrive sorted; pick the canonical one and move it to the front.
    auto best = std::min_element(members.begin(), members.end(),
                                 [&](const std::string& x, const std::string& y) {
                                   if (freq(x) != freq(y)) return freq(x) > freq(y);
                                   if (x.size() != y.size()) return x.size() < y.size();
                                   return x < y;
                                 });
    std::rotate(members.begin(), best, best + 1);
    norms::Feature f;
    f.phrase = members.front();
    f.members = std::move(members);
    features.push_back(std::move(f));
  }
  std::sort(features.begin(), features.end(),
            [](const norms::Feature& x, const norms::Feature& y) { return x.phrase < y.phrase; });
  for (std::size_t i = 0; i < features.size(); ++i) features[i].id = static_cast<int>(i);
  return features;
}

std::vector<norms::Feature> sample_features(const std::vector<norms::Feature>& features,
                                            const ClusterConfig& cfg) {
  if (cfg.sample_size > features.size()) {
    fail(ErrorCode::InvalidArgument, "sample size " + std::to_string(cfg.sample_size) +
                                         " exceeds " + std::to_string(features.size()) +
                                         " available features");
  }
  rng::Engine engine(cfg.seed);
  auto picked = rng::sample_indices(features.size(), cfg.sample_size, engine);
  std::sort(picked.begin(), picked.end());
  std::vector<norms::Feature> out;
  out.reserve(picked.size());
  for (auto idx : picked) {
    norms::Feature f = features[idx];
    f.id = static_cast<int>(out.size());
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace normforge::reduction
