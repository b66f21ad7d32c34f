// SPDX-License-Identifier: Apache-2.0

#include "quantprune/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "quantprune/errors.hpp"

namespace quantprune {

namespace {

double frobenius(const Matrix& m) {
  double sum = 0.0;
  for (double v : m.values()) sum += v * v;
  return std::sqrt(sum);
}

double frobenius_diff(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    double d = a.values()[i] - b.values()[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double ratio_or_zero(double num, double denom) {
  if (denom == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / denom;
}

std::size_t count_retained(std::span<const std::size_t> selected,
                           std::span<const std::size_t> injected) {
  std::set<std::size_t> sel(selected.begin(), selected.end());
  std::size_t n = 0;
  for (std::size_t idx : injected) n += sel.count(idx);
  return n;
}

// The downstream proxy models deployment, which quantizes asymmetrically
// regardless of the scheme used for sensitivity scoring.
QuantConfig deployment_config(QuantConfig cfg) {
  cfg.scheme = Scheme::asymmetric;
  return cfg;
}

}  // namespace

ErrorRecord eval_downstream_error(const TokenMatrix& tokens,
                                  const PruneResult& selection,
                                  const Matrix& weights,
                                  const QuantConfig& cfg) {
  cfg.validate();
  if (weights.rows() != tokens.dim()) {
    throw DataError("weights inner dimension does not match token channels");
  }
  Matrix retained = tokens.data.take_rows(selection.selected_indices);
  Matrix retained_q = fake_quantize_rows(retained, cfg).reconstructed;

  ErrorRecord record;
  record.retained_fakequant_error =
      ratio_or_zero(frobenius_diff(retained, retained_q), frobenius(retained));

  Matrix exact = matmul(retained, weights);
  Matrix quantized = matmul(retained_q, fake_quantize_columns(weights, cfg));
  record.downstream_proxy_error =
      ratio_or_zero(frobenius_diff(exact, quantized), frobenius(exact));
  return record;
}

ComparisonReport compare_strategies(const TokenMatrix& tokens,
                                    const ScoreVector& sp,
                                    const Matrix& weights,
                                    std::vector<double> alphas, std::int64_t k,
                                    const PruneConfig& cfg,
                                    std::span<const std::size_t> injected) {
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ConfigError("alpha values must lie in [0, 1]");
    }
  }
  alphas.push_back(0.0);
  alphas.push_back(1.0);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  const QuantConfig eval_cfg = deployment_config(cfg.quant);
  ComparisonReport report;
  report.config = cfg;
  report.keep = k;
  for (double alpha : alphas) {
    PruneConfig row_cfg = cfg;
    row_cfg.alpha = alpha;
    row_cfg.keep = k;
    PruneResult pruned = prune(tokens, sp, row_cfg);
    StrategyRow row;
    row.alpha = alpha;
    row.name = alpha == 1.0   ? "semantic_only"
               : alpha == 0.0 ? "quant_only"
                              : "fused";
    row.errors = eval_downstream_error(tokens, pruned, weights, eval_cfg);
    row.selected = std::move(pruned.selected_indices);
    if (!injected.empty()) {
      row.outliers_retained = count_retained(row.selected, injected);
    }
    report.strategies.push_back(std::move(row));
  }
  return report;
}

AblationReport run_ablation(const TokenMatrix& tokens, const ScoreVector& sp,
                            const Matrix& weights, std::int64_t k,
                            const PruneConfig& cfg,
                            std::span<const std::size_t> injected) {
  const QuantConfig eval_cfg = deployment_config(cfg.quant);
  AblationReport report;
  report.config = cfg;
  report.keep = k;
  for (MetricId metric : kAllMetrics) {
    PruneConfig row_cfg = cfg;
    row_cfg.metric = metric;
    row_cfg.keep = k;
    PruneResult pruned = prune(tokens, sp, row_cfg);
    AblationRow row;
    row.metric = metric;
    row.errors = eval_downstream_error(tokens, pruned, weights, eval_cfg);
    row.selected = std::move(pruned.selected_indices);
    if (!injected.empty()) {
      row.outliers_retained = count_retained(row.selected, injected);
    }
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const AblationRow& a, const AblationRow& b) {
              if (a.errors.downstream_proxy_error !=
                  b.errors.downstream_proxy_error) {
                return a.errors.downstream_proxy_error <
                       b.errors.downstream_proxy_error;
              }
              return static_cast<int>(a.metric) < static_cast<int>(b.metric);
            });
  report.ranking.reserve(report.rows.size());
  for (const AblationRow& row : report.rows) {
    report.ranking.push_back(row.metric);
  }
  return report;
}

}  // namespace quantprune
