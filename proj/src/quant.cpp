// SPDX-License-Identifier: Apache-2.0

#include "quantprune/quant.hpp"

#include <cmath>
#include <string>

#include "quantprune/errors.hpp"

namespace quantprune {

namespace {

double round_value(double x, Rounding mode) {
  // std::round is half-away-from-zero; nearbyint under the default FP
  // environment is half-to-even. The environment is never changed here.
  return mode == Rounding::half_away_from_zero ? std::round(x)
                                               : std::nearbyint(x);
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) {
    throw DataError(std::string(what) + " contains non-finite values");
  }
}

// One asymmetric group over strided storage. Reconstruction at the integer
// endpoints reuses the group min/max directly: s*L equals max-min by
// construction, and re-deriving the endpoint as fl(L*s)+Z is not bit-stable
// under requantization.
void asym_group(const double* src, double* dst, std::size_t count,
                std::size_t stride, const QuantConfig& cfg, double& scale_out,
                double& zero_out) {
  double mn = src[0];
  double mx = src[0];
  for (std::size_t i = 1; i < count; ++i) {
    double v = src[i * stride];
    if (v < mn) mn = v;
    if (v > mx) mx = v;
  }
  zero_out = mn;
  if (mx == mn) {
    scale_out = 0.0;
    for (std::size_t i = 0; i < count; ++i) dst[i * stride] = mn;
    return;
  }
  const auto levels = static_cast<double>(cfg.full_levels());
  const double s = (mx - mn) / levels;
  scale_out = s;
  for (std::size_t i = 0; i < count; ++i) {
    double k = round_value((src[i * stride] - mn) / s, cfg.rounding);
    if (k < 0.0) k = 0.0;
    if (k > levels) k = levels;
    double rec;
    if (k == 0.0) {
      rec = mn;
    } else if (k == levels) {
      rec = mx;
    } else {
      rec = mn + k * s;
    }
    dst[i * stride] = rec;
  }
}

// One symmetric group. |k| == L snaps to the signed absmax: L*s is exactly
// max|v| in real arithmetic, which keeps the extreme element bit-exact.
void sym_group(const double* src, double* dst, std::size_t count,
               std::size_t stride, const QuantConfig& cfg, double& scale_out) {
  double absmax = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double a = std::fabs(src[i * stride]);
    if (a > absmax) absmax = a;
  }
  if (absmax == 0.0) {
    scale_out = 0.0;
    for (std::size_t i = 0; i < count; ++i) dst[i * stride] = 0.0;
    return;
  }
  const auto levels = static_cast<double>(cfg.positive_levels());
  const double s = absmax / levels;
  scale_out = s;
  const double denom = s + cfg.epsilon;
  for (std::size_t i = 0; i < count; ++i) {
    double k = round_value(src[i * stride] / denom, cfg.rounding);
    if (k < -levels) k = -levels;
    if (k > levels) k = levels;
    double rec;
    if (k == levels) {
      rec = absmax;
    } else if (k == -levels) {
      rec = -absmax;
    } else {
      rec = k * s;
    }
    dst[i * stride] = rec;
  }
}

}  // namespace

void QuantConfig::validate() const {
  if (bits < 2 || bits > 32) {
    throw ConfigError("bits must be in [2, 32], got " + std::to_string(bits));
  }
  if (group_size < 1) {
    throw ConfigError("group_size must be >= 1");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be finite and >= 0");
  }
  if (!(clip_percentile > 0.0) || !(clip_percentile <= 100.0)) {
    throw ConfigError("clip_percentile must lie in (0, 100]");
  }
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::asymmetric ? "asymmetric" : "symmetric";
}

std::string_view to_string(Rounding rounding) {
  return rounding == Rounding::half_away_from_zero ? "half_away_from_zero"
                                                   : "half_to_even";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "asymmetric") return Scheme::asymmetric;
  if (name == "symmetric") return Scheme::symmetric;
  throw ConfigError("unknown scheme: " + std::string(name));
}

Rounding rounding_from_string(std::string_view name) {
  if (name == "half_away_from_zero") return Rounding::half_away_from_zero;
  if (name == "half_to_even") return Rounding::half_to_even;
  throw ConfigError("unknown rounding: " + std::string(name));
}

GroupPartition partition_groups(std::size_t dim, std::size_t group_size) {
  if (dim == 0) throw ConfigError("partition_groups: dim must be >= 1");
  if (group_size == 0) {
    throw ConfigError("partition_groups: group_size must be >= 1");
  }
  GroupPartition p;
  p.dim = dim;
  p.group_size = group_size;
  p.num_groups = (dim + group_size - 1) / group_size;
  p.last_group_size = dim - (p.num_groups - 1) * group_size;
  return p;
}

FakeQuantResult quantize_asymmetric_groupwise(const Matrix& tensor,
                                              const QuantConfig& cfg) {
  cfg.validate();
  if (cfg.scheme != Scheme::asymmetric) {
    throw ConfigError("quantize_asymmetric_groupwise requires scheme=asymmetric");
  }
  require_finite(tensor, "quantization input");
  if (tensor.empty()) throw DataError("quantization input is empty");

  FakeQuantResult out;
  out.partition =
      partition_groups(tensor.cols(), static_cast<std::size_t>(cfg.group_size));
  out.reconstructed = Matrix(tensor.rows(), tensor.cols());
  out.scales = Matrix(tensor.rows(), out.partition.num_groups);
  out.zero_points = Matrix(tensor.rows(), out.partition.num_groups);
  for (std::size_t r = 0; r < tensor.rows(); ++r) {
    for (std::size_t m = 0; m < out.partition.num_groups; ++m) {
      auto g = out.partition.group(m);
      asym_group(tensor.row(r).data() + g.begin,
                 out.reconstructed.row(r).data() + g.begin, g.end - g.begin, 1,
                 cfg, out.scales(r, m), out.zero_points(r, m));
    }
  }
  return out;
}

FakeQuantResult simulate_symmetric_groupwise(const Matrix& token_rows,
                                             const QuantConfig& cfg) {
  cfg.validate();
  if (cfg.scheme != Scheme::symmetric) {
    throw ConfigError("simulate_symmetric_groupwise requires scheme=symmetric");
  }
  require_finite(token_rows, "quantization input");
  if (token_rows.empty()) throw DataError("quantization input is empty");

  FakeQuantResult out;
  out.partition = partition_groups(token_rows.cols(),
                                   static_cast<std::size_t>(cfg.group_size));
  out.reconstructed = Matrix(token_rows.rows(), token_rows.cols());
  out.scales = Matrix(token_rows.rows(), out.partition.num_groups);
  for (std::size_t r = 0; r < token_rows.rows(); ++r) {
    for (std::size_t m = 0; m < out.partition.num_groups; ++m) {
      auto g = out.partition.group(m);
      sym_group(token_rows.row(r).data() + g.begin,
                out.reconstructed.row(r).data() + g.begin, g.end - g.begin, 1,
                cfg, out.scales(r, m));
    }
  }
  return out;
}

FakeQuantResult simulate_symmetric_groupwise(std::span<const double> token,
                                             const QuantConfig& cfg) {
  Matrix row(1, token.size(),
             std::vector<double>(token.begin(), token.end()));
  return simulate_symmetric_groupwise(row, cfg);
}

FakeQuantResult fake_quantize_rows(const Matrix& tensor,
                                   const QuantConfig& cfg) {
  return cfg.scheme == Scheme::asymmetric
             ? quantize_asymmetric_groupwise(tensor, cfg)
             : simulate_symmetric_groupwise(tensor, cfg);
}

Matrix fake_quantize_columns(const Matrix& weights, const QuantConfig& cfg) {
  cfg.validate();
  require_finite(weights, "quantization input");
  if (weights.empty()) throw DataError("quantization input is empty");

  auto partition =
      partition_groups(weights.rows(), static_cast<std::size_t>(cfg.group_size));
  Matrix recon(weights.rows(), weights.cols());
  const double* src = weights.values().data();
  double* dst = recon.values().data();
  const std::size_t stride = weights.cols();
  for (std::size_t c = 0; c < weights.cols(); ++c) {
    for (std::size_t m = 0; m < partition.num_groups; ++m) {
      auto g = partition.group(m);
      double scale = 0.0;
      double zero = 0.0;
      if (cfg.scheme == Scheme::asymmetric) {
        asym_group(src + g.begin * stride + c, dst + g.begin * stride + c,
                   g.end - g.begin, stride, cfg, scale, zero);
      } else {
        sym_group(src + g.begin * stride + c, dst + g.begin * stride + c,
                  g.end - g.begin, stride, cfg, scale);
      }
    }
  }
  return recon;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DataError("matmul: inner dimensions disagree (" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + ")");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

Matrix quantized_matmul_proxy(const Matrix& activations, const Matrix& weights,
                              const QuantConfig& cfg) {
  if (activations.cols() != weights.rows()) {
    throw DataError("quantized_matmul_proxy: inner dimensions disagree");
  }
  Matrix qa = fake_quantize_rows(activations, cfg).reconstructed;
  Matrix qw = fake_quantize_columns(weights, cfg);
  return matmul(qa, qw);
}

}  // namespace quantprune
