// SPDX-License-Identifier: Apache-2.0
//
// Independent per-scalar reference quantizers for oracle tests. Kept apart
// from the library on purpose: plain loops, one element at a time, bounds
// recomputed from scratch per call. Keep this file free of library headers
// other than basic config enums.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "quantprune/quant.hpp"

namespace oracle {

inline double ref_round(double x, quantprune::Rounding mode) {
  if (mode == quantprune::Rounding::half_away_from_zero) {
    double f = std::floor(std::fabs(x));
    double frac = std::fabs(x) - f;
    double mag = frac < 0.5 ? f : f + 1.0;
    return x < 0.0 ? -mag : mag;
  }
  // half to even
  double f = std::floor(x);
  double frac = x - f;
  if (frac > 0.5) return f + 1.0;
  if (frac < 0.5) return f;
  return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

// Asymmetric reconstruction of the element at `index` of one group.
inline double ref_asym_scalar(const std::vector<double>& group,
                              std::size_t index, int bits,
                              quantprune::Rounding mode) {
  double lo = group[0];
  double hi = group[0];
  for (double v : group) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) return lo;
  const double levels = std::pow(2.0, bits) - 1.0;
  const double s = (hi - lo) / levels;
  double k = ref_round((group[index] - lo) / s, mode);
  if (k < 0.0) k = 0.0;
  if (k > levels) k = levels;
  if (k == 0.0) return lo;
  if (k == levels) return hi;
  return lo + k * s;
}

// Symmetric reconstruction of the element at `index` of one group.
inline double ref_sym_scalar(const std::vector<double>& group,
                             std::size_t index, int bits, double epsilon,
                             quantprune::Rounding mode) {
  double absmax = 0.0;
  for (double v : group) absmax = std::max(absmax, std::fabs(v));
  if (absmax == 0.0) return 0.0;
  const double levels = std::pow(2.0, bits - 1) - 1.0;
  const double s = absmax / levels;
  double k = ref_round(group[index] / (s + epsilon), mode);
  if (k < -levels) k = -levels;
  if (k > levels) k = levels;
  if (k == levels) return absmax;
  if (k == -levels) return -absmax;
  return k * s;
}

// Group-wise reference over a whole row.
inline std::vector<double> ref_fakequant_row(const std::vector<double>& row,
                                             int bits, int group_size,
                                             double epsilon, bool symmetric,
                                             quantprune::Rounding mode) {
  std::vector<double> out(row.size());
  for (std::size_t begin = 0; begin < row.size();
       begin += static_cast<std::size_t>(group_size)) {
    std::size_t end =
        std::min(row.size(), begin + static_cast<std::size_t>(group_size));
    std::vector<double> group(row.begin() + static_cast<std::ptrdiff_t>(begin),
                              row.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = 0; i < group.size(); ++i) {
      out[begin + i] = symmetric
                           ? ref_sym_scalar(group, i, bits, epsilon, mode)
                           : ref_asym_scalar(group, i, bits, mode);
    }
  }
  return out;
}

inline double ref_l2_diff(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace oracle
