// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace quantprune {

// xoshiro256** (Blackman-Vigna) seeded through splitmix64. All derived draws
// use only integer ops plus IEEE add/mul, so sequences are bit-identical
// across platforms. Report reproducibility depends on this generator; do not
// swap it for a standard-library engine.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed);

  std::uint64_t next_u64();

  // [0, 1) with 53 random mantissa bits.
  double uniform01();

  // Zero-mean, unit-variance, bounded to [-6, 6]: sum of 12 uniforms minus 6.
  double gaussian_like();

  // Unbiased integer in [0, n); n must be nonzero.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace quantprune
