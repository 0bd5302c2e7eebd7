// Copyright 2026 The adex Authors
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

#include <cmath>
#include <cstdint>

namespace adex {

// Deterministic PRNG utilities.  All simulator randomness flows through this
// file so that a (seed, config) pair fully determines every byte of output.
// Standard-library distributions are avoided on purpose: their sampling
// algorithms are implementation-defined, which would break the reproducibility
// contract across toolchains.

// splitmix64 step (Steele, Lea, Flood).  Used to expand seeds and to derive
// independent substream seeds from (seed, index) pairs.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stateless seed derivation for per-request substreams.  Requests can then be
// simulated in any order (or in parallel) with identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ull + index * 0x9e3779b97f4a7c15ull);
  std::uint64_t a = splitmix64_next(s);
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b << 1);
}

// xoshiro256** (Blackman, Vigna): small, fast, and trivially seedable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 significant bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
  // caring about at simulation scale, and fully deterministic).
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller without caching: consumes two uniforms per draw so the call
  // sequence stays predictable.
  double normal(double mu, double sigma) {
    double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mu + sigma * z;
  }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  // Kumaraswamy(a, b) on (0, 1): beta-like shapes with a closed-form inverse
  // CDF, so sampling stays portable.  x = (1 - (1 - u)^(1/b))^(1/a).
  double kumaraswamy(double a, double b) {
    double u = uniform01();
    return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace adex
