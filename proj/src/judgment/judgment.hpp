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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "similarity/similarity.hpp"

namespace normforge::judgment {

using similarity::Choice;

// Word vectors in the fastText .vec text layout: a `count dimension` header,
// then `word v1 ... vD` per line.
class WordVectorTable {
 public:
  static WordVectorTable load(const std::filesystem::path& path);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(const std::string& word) const;
  void add(const std::string& word, std::vector<double> v);

  // Multi-word labels ("fire truck", "fire_truck") average the vectors of the
  // words that resolve, trying each word verbatim and then lower-cased.
  // Throws NotFound when no word resolves.
  std::vector<double> resolve(const std::string& label) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Anything that can say how far apart two concepts are.
class Space {
 public:
  virtual ~Space() = default;
  virtual std::string name() const = 0;
  // Throws NotFound for a concept the space cannot place.
  virtual double distance(const std::string& x, const std::string& y) const = 0;
};

class DissimilaritySpace : public Space {
 public:
  DissimilaritySpace(std::string name, similarity::DissimilarityMatrix m);
  std::string name() const override { return name_; }
  double distance(const std::string& x, const std::string& y) const override;

 private:
  std::size_t index(const std::string& label) const;
  std::string name_;
  similarity::DissimilarityMatrix m_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Cosine distance between resolved word vectors.
class WordVectorSpace : public Space {
 public:
  WordVectorSpace(std::string name, const WordVectorTable& table)
      : name_(std::move(name)), table_(table) {}
  std::string name() const override { return name_; }
  double distance(const std::string& x, const std::string& y) const override;

 private:
  std::string name_;
  const WordVectorTable& table_;
};

struct LabeledTriplet {
  std::string target;
  std::string opt_a;
  std::string opt_b;
};

// Triplet file written by the miner; ids are record positions (0-based).
std::vector<LabeledTriplet> load_triplets(const std::filesystem::path& path);

struct TriadResponse {
  std::string participant;
  std::size_t triplet_id = 0;
  Choice choice = Choice::A;
};

// Line records `participant TAB triplet_id TAB {A|B}`.
std::vector<TriadResponse> load_responses(const std::filesystem::path& path);

// argmin over the two options of distance(target, option); exact ties give Tie.
Choice predict_choice(const Space& space, const LabeledTriplet& t);

// Strict majority of the responses for one triplet; an exact split is Tie.
Choice majority_vote(const std::vector<TriadResponse>& responses, std::size_t triplet_id);

// One vote per triplet id 0..n_triplets-1; a triplet without responses is a
// coverage error.
std::vector<Choice> majority_votes(const std::vector<TriadResponse>& responses,
                                   std::size_t n_triplets);

enum class Flag { Agree, Disagree, VoteTie, PredictionTie };

struct AgreementReport {
  std::string space;
  double proportion = 0;  // k / n over non-tie triplets
  std::size_t k = 0;
  std::size_t n = 0;
  double p_value = 1;     // two-sided exact binomial against 0.5
  std::vector<Flag> flags;
};

// Triplets with a tied vote or a tied prediction are flagged and left out of
// n.
AgreementReport agreement(const Space& space, const std::vector<LabeledTriplet>& triplets,
                          const std::vector<Choice>& votes);

// Exact two-sided binomial test: the total probability of all outcomes no more
// likely than k (relative tolerance 1e-7), summed in log space.
double binomial_test(long long k, long long n, double p0 = 0.5);

struct TTestResult {
  double t = 0;
  double df = 0;
  double p_value = 1;
};

// Paired two-sided t-test on x - y.
TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided tail of Student's t: P(|T| >= |t|).
double student_t_two_sided(double t, double df);

}  // namespace normforge::judgment
