// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "quantprune/matrix.hpp"

namespace quantprune {

enum class Scheme { asymmetric, symmetric };
enum class Rounding { half_away_from_zero, half_to_even };

struct QuantConfig {
  int bits = 4;
  int group_size = 128;
  Scheme scheme = Scheme::symmetric;
  double epsilon = 1e-8;
  Rounding rounding = Rounding::half_away_from_zero;
  double clip_percentile = 99.0;

  // Throws ConfigError on violated invariants.
  void validate() const;

  // 2^b - 1, the asymmetric integer range.
  std::int64_t full_levels() const noexcept {
    return (std::int64_t{1} << bits) - 1;
  }
  // 2^(b-1) - 1 positive levels of the symmetric grid (7 at b=4).
  std::int64_t positive_levels() const noexcept {
    return (std::int64_t{1} << (bits - 1)) - 1;
  }
};

std::string_view to_string(Scheme scheme);
std::string_view to_string(Rounding rounding);
Scheme scheme_from_string(std::string_view name);
Rounding rounding_from_string(std::string_view name);

// Contiguous partition of D channels into ceil(D/G) groups; only the last
// group may be short.
struct GroupPartition {
  std::size_t dim = 0;
  std::size_t group_size = 0;
  std::size_t num_groups = 0;
  std::size_t last_group_size = 0;

  struct Range {
    std::size_t begin;
    std::size_t end;
  };
  Range group(std::size_t m) const noexcept {
    std::size_t begin = m * group_size;
    std::size_t end = begin + group_size;
    if (end > dim) end = dim;
    return {begin, end};
  }
};

GroupPartition partition_groups(std::size_t dim, std::size_t group_size);

struct FakeQuantResult {
  Matrix reconstructed;   // same shape as the input
  Matrix scales;          // rows x num_groups
  Matrix zero_points;     // rows x num_groups; empty for the symmetric scheme
  GroupPartition partition;
};

// Deployment-style asymmetric uniform quantizer, one (s, Z) per group along
// the last axis: s = (max-min)/(2^b-1), Z = min, values mapped to
// Clamp(round((x-Z)/s), 0, 2^b-1)*s + Z. A constant group reconstructs to Z
// exactly with s = 0 (no division).
FakeQuantResult quantize_asymmetric_groupwise(const Matrix& tensor,
                                              const QuantConfig& cfg);

// Symmetric INT-b simulation, one scale per group: s = max|v|/L with
// L = 2^(b-1)-1, value = Clamp(round(v/(s+eps)), -L, L)*s. An all-zero group
// reconstructs to zeros with s = 0.
FakeQuantResult simulate_symmetric_groupwise(const Matrix& token_rows,
                                             const QuantConfig& cfg);
FakeQuantResult simulate_symmetric_groupwise(std::span<const double> token,
                                             const QuantConfig& cfg);

// Dispatches on cfg.scheme; groups run along the last axis.
FakeQuantResult fake_quantize_rows(const Matrix& tensor,
                                   const QuantConfig& cfg);

// Same quantizer applied along the first axis (the reduction axis of a
// d_in x d_out weight matrix).
Matrix fake_quantize_columns(const Matrix& weights, const QuantConfig& cfg);

// Q(X)Q(W): both operands fake-quantized group-wise along their reduction
// axes, then multiplied exactly.
Matrix quantized_matmul_proxy(const Matrix& activations, const Matrix& weights,
                              const QuantConfig& cfg);

Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace quantprune
