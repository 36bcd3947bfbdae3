// Copyright 2026 The vqalab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seed derivation and portable sampling helpers. The standard distributions
// are implementation defined, so anything that feeds a reproducible artifact
// goes through these instead.

#ifndef VQALAB_RANDOM_H_
#define VQALAB_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace vqalab::rng {

inline uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Independent stream for work item `index` under a run seed.
inline uint64_t DeriveSeed(uint64_t seed, uint64_t index) {
  uint64_t state = seed;
  const uint64_t a = SplitMix64(state);
  state = a ^ (index * 0xD1B54A32D192ED03ULL);
  return SplitMix64(state);
}

inline std::mt19937_64 DerivedEngine(uint64_t seed, uint64_t index) {
  return std::mt19937_64(DeriveSeed(seed, index));
}

inline double Uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline size_t UniformIndex(std::mt19937_64& g, size_t n) {
  return static_cast<size_t>(Uniform01(g) * static_cast<double>(n));
}

// Box-Muller; consumes two draws per sample.
inline double Normal01(std::mt19937_64& g) {
  const double u1 = 1.0 - Uniform01(g);
  const double u2 = Uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void Shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformIndex(g, i)]);
  }
}

}  // namespace vqalab::rng

#endif  // VQALAB_RANDOM_H_
