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

#include "common/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "common/error.hpp"

namespace normforge::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Engine stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(splitmix64(seed ^ splitmix64(index + 1)));
}

std::uint64_t bounded(Engine& engine, std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "bounded: n must be positive");
  // 2^64 mod n computed without overflow.
  const std::uint64_t rem = (0 - n) % n;
  const std::uint64_t limit = 0 - rem;  // 2^64 - rem, wraps to 0 when rem == 0
  for (;;) {
    std::uint64_t r = engine();
    if (rem == 0 || r < limit) return r % n;
  }
}

double unit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double normal(Engine& engine) {
  double u1 = unit(engine);
  while (u1 <= 0.0) u1 = unit(engine);
  double u2 = unit(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Engine& engine) {
  if (k > n) fail(ErrorCode::InvalidArgument, "sample larger than population");
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(engine, n - i));
    std::swap(p[i], p[j]);
  }
  p.resize(k);
  return p;
}

}  // namespace normforge::rng
