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

// Reference computations used to check the library. Each one is written from
// the textbook definition, shares no code with src/, and favours clarity over
// speed.

#include <Eigen/Dense>

#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Inverse of Phi(x) = erfc(-x / sqrt 2) / 2 by bisection to machine precision.
double probit(double p);

// probit(H) - probit(F) with rates 0 and 1 moved to 1/(2N) and 1 - 1/(2N).
double d_prime(long long hits, long long misses, long long fas, long long crs);

// Model answer -> verdict: first five blank-separated words, ASCII punctuation
// removed, lower-cased, looked up in {true, yes, false, no}.
bool parse(const std::string& raw);

// Average-linkage clustering by repeated full scans: merge the closest pair of
// clusters (mean pairwise cosine dissimilarity) while it is <= tau.
std::set<std::set<std::size_t>> agglomerate(const std::vector<std::vector<double>>& vectors,
                                            double tau);

// k distinct indices of [0, n) drawn by partial Fisher-Yates from
// std::mt19937_64(seed) with rejection-sampled bounded integers.
std::vector<std::size_t> sample(std::size_t n, std::size_t k, std::uint64_t seed);

// min over orthogonal R and s of ||A_std - s B_std R||^2 found by Givens
// coordinate ascent from several starts in both orientation classes.
double procrustes_disparity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Every (t, x, y), x < y, where the two spaces order x and y oppositely with
// both differences above eps, scored by the smaller difference.
struct Flip {
  std::size_t t, x, y;
  double score;
};
std::vector<Flip> all_flips(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps);

// Two-sided exact binomial p-value via Boost.Math.
double binomial_p(long long k, long long n, double p0);

// Paired t-test via Boost.Math's Student t distribution.
struct TTest {
  double t, df, p;
};
TTest paired_t(const std::vector<double>& x, const std::vector<double>& y);

// Percentile bootstrap of d' with std::mt19937 and std::uniform_int_distribution.
std::pair<double, double> bootstrap_dprime(const std::vector<bool>& gold,
                                           const std::vector<bool>& pred, int resamples,
                                           unsigned seed);

}  // namespace oracle
