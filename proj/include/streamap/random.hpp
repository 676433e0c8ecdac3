// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_RANDOM_HPP_
#define STREAMAP_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace streamap {

// Counter-based draws: the value depends only on (seed, index), so the
// i-th draw can be taken without replaying the first i-1. The mixing
// function is the splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t index,
                                  std::uint64_t stream = 0) {
  return mix64(mix64(mix64(seed) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// Uniform in [0, 1) with 53 bits of resolution.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index,
                              std::uint64_t stream = 0) {
  return static_cast<double>(counter_bits(seed, index, stream) >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two independent counter streams.
inline double counter_normal(std::uint64_t seed, std::uint64_t index) {
  const double u1 = 1.0 - counter_uniform(seed, index, 1);  // (0, 1]
  const double u2 = counter_uniform(seed, index, 2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace streamap

#endif  // STREAMAP_RANDOM_HPP_
