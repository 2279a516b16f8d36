// Copyright 2026 The Coughpipe Authors
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

#ifndef COUGHPIPE_RNG_H_
#define COUGHPIPE_RNG_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace coughpipe {

// Deterministic pseudo random generator used everywhere randomness is
// needed. The engine is xoshiro256++ seeded through splitmix64, so a
// 64-bit seed fully determines every stream on every platform; the
// standard library engines are deliberately avoided because their
// distributions are not bit-portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = split_next(x);
  }

  // Derives an independent child seed. Streams for parallel work units are
  // created as Rng(Rng::derive(seed, unit_index)) so the schedule of the
  // units cannot change the numbers each unit sees.
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    split_next(x);
    return split_next(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). Fixed-point multiply keeps the mapping
  // identical across platforms (no modulo bias games, no libc involved).
  size_t uniform_index(size_t n) {
    return static_cast<size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via the Box-Muller transform. Each call consumes two
  // uniforms and returns the cosine branch, so the mapping from the
  // uniform stream to the normal stream is one-to-two regardless of call
  // history.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]: keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Fisher-Yates shuffle driven by uniform_index.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static uint64_t split_next(uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t state_[4];
};

}  // namespace coughpipe

#endif  // COUGHPIPE_RNG_H_
