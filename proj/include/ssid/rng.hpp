// Copyright 2026 The ssid Authors.
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
#include <initializer_list>
#include <cmath>
#include <random>

namespace ssid {

// Every stochastic step in the library draws from this engine. Draws are
// made with the explicit arithmetic below rather than std:: distributions so
// that tests can replay a seeded trace independently.
using Rng = std::mt19937_64;

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a (base, tag...) tuple, e.g. (train_seed, epoch, batch, item).
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> parts) {
  uint64_t h = splitmix64(base);
  for (uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Uniform integer in [0, n). The modulo bias is below 2^-40 for every n used
// here.
inline uint64_t uniform_index(Rng& rng, uint64_t n) { return rng() % n; }

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Standard normal via Box-Muller; consumes two draws.
inline double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace ssid
