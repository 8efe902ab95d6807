// Copyright 2026 flow4d contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace flow4d::rng {

/// SplitMix64 finalizer. Full-period avalanche of a 64-bit input.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based key: a pure function of (seed, stream, index). Draws made
/// from it are schedule independent, so parallel generation is reproducible.
inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
  return mix(mix(mix(seed) ^ stream) ^ index);
}

/// Uniform draw in (0, 1] (never exactly 0, safe under log).
inline double uniformOpen(std::uint64_t k) {
  return double((k >> 11) + 1) * 0x1.0p-53;
}

struct GaussPair {
  double a;
  double b;
};

/// Two independent standard normal draws for (seed, stream, index),
/// via Box-Muller on two counter-derived uniforms.
inline GaussPair gaussianPair(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
  const std::uint64_t k1 = key(seed, stream, index);
  const std::uint64_t k2 = mix(k1 ^ 0xD1B54A32D192ED03ULL);
  const double u1 = uniformOpen(k1);
  const double u2 = uniformOpen(k2);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * M_PI * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace flow4d::rng
