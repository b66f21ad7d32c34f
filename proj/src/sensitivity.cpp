// SPDX-License-Identifier: Apache-2.0

#include "quantprune/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quantprune/errors.hpp"

namespace quantprune {

namespace {

double l2_residual(std::span<const double> original,
                   std::span<const double> reconstructed) {
  double sum = 0.0;
  for (std::size_t j = 0; j < original.size(); ++j) {
    double r = original[j] - reconstructed[j];
    sum += r * r;
  }
  return std::sqrt(sum);
}

// Linear-interpolation percentile of |v|, the numpy default.
double abs_percentile(std::span<const double> values, double percentile) {
  std::vector<double> mags(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) mags[j] = std::fabs(values[j]);
  std::sort(mags.begin(), mags.end());
  if (mags.size() == 1) return mags[0];
  double pos = percentile / 100.0 * static_cast<double>(mags.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= mags.size() - 1) return mags.back();
  double frac = pos - static_cast<double>(lo);
  return mags[lo] + frac * (mags[lo + 1] - mags[lo]);
}

// Token-wise symmetric simulation with the scale taken from a percentile of
// |v| instead of the absolute maximum; out-of-range values saturate through
// the [-L, L] clamp. Residuals are measured against the original values.
double clip_absmax_error(std::span<const double> token,
                         const QuantConfig& cfg) {
  const double clip = abs_percentile(token, cfg.clip_percentile);
  if (clip == 0.0) {
    double sum = 0.0;
    for (double v : token) sum += v * v;
    return std::sqrt(sum);
  }
  const auto levels = static_cast<double>(cfg.positive_levels());
  const double s = clip / levels;
  const double denom = s + cfg.epsilon;
  double sum = 0.0;
  for (double v : token) {
    double k = v / denom;
    k = cfg.rounding == Rounding::half_away_from_zero ? std::round(k)
                                                      : std::nearbyint(k);
    if (k < -levels) k = -levels;
    if (k > levels) k = levels;
    double rec;
    if (k == levels) {
      rec = clip;
    } else if (k == -levels) {
      rec = -clip;
    } else {
      rec = k * s;
    }
    double r = v - rec;
    sum += r * r;
  }
  return std::sqrt(sum);
}

ScoreVector residual_scores(const TokenMatrix& tokens, const QuantConfig& cfg,
                            ScoreKind kind) {
  auto fq = fake_quantize_rows(tokens.data, cfg);
  ScoreVector out;
  out.kind = kind;
  out.values.resize(tokens.count());
  for (std::size_t i = 0; i < tokens.count(); ++i) {
    out.values[i] = l2_residual(tokens.data.row(i), fq.reconstructed.row(i));
  }
  return out;
}

}  // namespace

std::string_view to_string(MetricId id) {
  switch (id) {
    case MetricId::linf_norm: return "linf_norm";
    case MetricId::l1_norm: return "l1_norm";
    case MetricId::l2_norm: return "l2_norm";
    case MetricId::variance: return "variance";
    case MetricId::tokenwise_absmax: return "tokenwise_absmax";
    case MetricId::clip_absmax: return "clip_absmax";
    case MetricId::groupwise_absmax: return "groupwise_absmax";
    case MetricId::outlier_intensity: return "outlier_intensity";
    case MetricId::combine: return "combine";
  }
  return "unknown";
}

MetricId metric_from_string(std::string_view name) {
  for (MetricId id : kAllMetrics) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown metric: " + std::string(name));
}

ScoreVector group_quant_error(const TokenMatrix& tokens,
                              const QuantConfig& cfg) {
  return residual_scores(tokens, cfg, ScoreKind::group_error_e);
}

ScoreVector outlier_intensity(const TokenMatrix& tokens) {
  ScoreVector out;
  out.kind = ScoreKind::outlier_r;
  out.values.resize(tokens.count());
  for (std::size_t i = 0; i < tokens.count(); ++i) {
    auto row = tokens.data.row(i);
    double mn = row[0];
    double mx = row[0];
    for (double v : row) {
      if (v < mn) mn = v;
      if (v > mx) mx = v;
    }
    out.values[i] = mx - mn;
  }
  return out;
}

ScoreVector minmax_normalize(const ScoreVector& scores) {
  if (scores.values.empty()) {
    throw DataError("cannot normalize an empty score vector");
  }
  double mn = scores.values[0];
  double mx = scores.values[0];
  for (double v : scores.values) {
    if (v < mn) mn = v;
    if (v > mx) mx = v;
  }
  ScoreVector out = scores;
  out.raw = scores.values;
  out.normalized = true;
  if (mx == mn) {
    std::fill(out.values.begin(), out.values.end(), 0.5);
    return out;
  }
  const double span = mx - mn;
  for (double& v : out.values) v = (v - mn) / span;
  return out;
}

ScoreVector hybrid_sensitivity(const TokenMatrix& tokens,
                               const QuantConfig& cfg) {
  ScoreVector ne = minmax_normalize(group_quant_error(tokens, cfg));
  ScoreVector nr = minmax_normalize(outlier_intensity(tokens));
  ScoreVector out;
  out.kind = ScoreKind::hybrid_sq;
  out.normalized = true;
  out.values.resize(tokens.count());
  for (std::size_t i = 0; i < tokens.count(); ++i) {
    out.values[i] = 0.5 * ne.values[i] + 0.5 * nr.values[i];
  }
  return out;
}

ScoreVector metric_score(const TokenMatrix& tokens, MetricId metric,
                         const QuantConfig& cfg) {
  cfg.validate();
  ScoreVector out;
  out.kind = ScoreKind::metric_variant;
  out.metric = metric;
  switch (metric) {
    case MetricId::linf_norm: {
      out.values.resize(tokens.count());
      for (std::size_t i = 0; i < tokens.count(); ++i) {
        double m = 0.0;
        for (double v : tokens.data.row(i)) m = std::max(m, std::fabs(v));
        out.values[i] = m;
      }
      return out;
    }
    case MetricId::l1_norm: {
      out.values.resize(tokens.count());
      for (std::size_t i = 0; i < tokens.count(); ++i) {
        double sum = 0.0;
        for (double v : tokens.data.row(i)) sum += std::fabs(v);
        out.values[i] = sum;
      }
      return out;
    }
    case MetricId::l2_norm: {
      out.values.resize(tokens.count());
      for (std::size_t i = 0; i < tokens.count(); ++i) {
        double sum = 0.0;
        for (double v : tokens.data.row(i)) sum += v * v;
        out.values[i] = std::sqrt(sum);
      }
      return out;
    }
    case MetricId::variance: {
      // Population variance over the D channels.
      out.values.resize(tokens.count());
      const auto dim = static_cast<double>(tokens.dim());
      for (std::size_t i = 0; i < tokens.count(); ++i) {
        double mean = 0.0;
        for (double v : tokens.data.row(i)) mean += v;
        mean /= dim;
        double sum = 0.0;
        for (double v : tokens.data.row(i)) {
          double d = v - mean;
          sum += d * d;
        }
        out.values[i] = sum / dim;
      }
      return out;
    }
    case MetricId::tokenwise_absmax: {
      QuantConfig tokenwise = cfg;
      tokenwise.scheme = Scheme::symmetric;
      tokenwise.group_size = static_cast<int>(tokens.dim());
      ScoreVector e = group_quant_error(tokens, tokenwise);
      e.kind = ScoreKind::metric_variant;
      e.metric = metric;
      return e;
    }
    case MetricId::clip_absmax: {
      QuantConfig sym = cfg;
      sym.scheme = Scheme::symmetric;
      out.values.resize(tokens.count());
      for (std::size_t i = 0; i < tokens.count(); ++i) {
        out.values[i] = clip_absmax_error(tokens.data.row(i), sym);
      }
      return out;
    }
    case MetricId::groupwise_absmax: {
      ScoreVector e = group_quant_error(tokens, cfg);
      e.kind = ScoreKind::metric_variant;
      e.metric = metric;
      return e;
    }
    case MetricId::outlier_intensity: {
      ScoreVector r = outlier_intensity(tokens);
      r.kind = ScoreKind::metric_variant;
      r.metric = metric;
      return r;
    }
    case MetricId::combine: {
      ScoreVector h = hybrid_sensitivity(tokens, cfg);
      h.kind = ScoreKind::metric_variant;
      h.metric = metric;
      return h;
    }
  }
  throw ConfigError("unknown metric id");
}

}  // namespace quantprune
