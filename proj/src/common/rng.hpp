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
#include <random>
#include <vector>

namespace normforge::rng {

// All seeded randomness in the toolkit goes through std::mt19937_64, whose
// output sequence is fixed by the C++ standard, plus the helpers below. The
// std:: distributions are avoided because their algorithms are
// implementation-defined.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for (seed, stream index).
Engine stream(std::uint64_t seed, std::uint64_t index);

// Uniform integer in [0, n) by rejection: draws r = engine() until
// r < 2^64 - (2^64 mod n), then returns r mod n. Requires n > 0.
std::uint64_t bounded(Engine& engine, std::uint64_t n);

// Uniform double in [0, 1) from the top 53 bits.
double unit(Engine& engine);

// Standard normal by Box-Muller, one value per call (the second is dropped).
double normal(Engine& engine);

// Fisher-Yates: for i = n-1 down to 1, swap(v[i], v[bounded(i + 1)]).
template <typename T>
void shuffle(std::vector<T>& v, Engine& engine) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(engine, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Uniform sample of k distinct indices from [0, n) by partial Fisher-Yates:
// start from the identity permutation p, and for i = 0..k-1 swap p[i] with
// p[i + bounded(n - i)]. Returns p[0..k) in draw order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Engine& engine);

}  // namespace normforge::rng
