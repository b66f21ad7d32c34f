// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quantprune/matrix.hpp"
#include "quantprune/prune.hpp"

namespace quantprune {

struct ErrorRecord {
  // ||X_S - Q(X_S)||_F / ||X_S||_F over the retained rows.
  double retained_fakequant_error = 0.0;
  // ||X_S W - Q(X_S) Q(W)||_F / ||X_S W||_F.
  double downstream_proxy_error = 0.0;
};

// Errors of the quantized product restricted to the retained tokens,
// computed with the quantizer selected by cfg.
ErrorRecord eval_downstream_error(const TokenMatrix& tokens,
                                  const PruneResult& selection,
                                  const Matrix& weights,
                                  const QuantConfig& cfg);

struct StrategyRow {
  std::string name;  // semantic_only (alpha=1), quant_only (alpha=0), fused
  double alpha = 0.0;
  std::vector<std::size_t> selected;
  ErrorRecord errors;
  std::optional<std::size_t> outliers_retained;
};

struct ComparisonReport {
  std::vector<StrategyRow> strategies;  // ascending alpha
  PruneConfig config;
  std::int64_t keep = 0;
  std::optional<std::uint64_t> seed;
};

// One row per requested alpha plus the alpha=0 and alpha=1 anchors
// (duplicates collapse). Scoring follows cfg; the downstream proxy always
// uses the asymmetric deployment quantizer.
ComparisonReport compare_strategies(const TokenMatrix& tokens,
                                    const ScoreVector& sp,
                                    const Matrix& weights,
                                    std::vector<double> alphas,
                                    std::int64_t k, const PruneConfig& cfg,
                                    std::span<const std::size_t> injected = {});

struct AblationRow {
  MetricId metric = MetricId::combine;
  std::vector<std::size_t> selected;
  ErrorRecord errors;
  std::optional<std::size_t> outliers_retained;
};

struct AblationReport {
  std::vector<AblationRow> rows;     // ascending downstream error
  std::vector<MetricId> ranking;     // metric ids in row order
  PruneConfig config;
  std::int64_t keep = 0;
  std::optional<std::uint64_t> seed;
};

// All nine registry metrics fused at cfg.alpha and evaluated at k.
AblationReport run_ablation(const TokenMatrix& tokens, const ScoreVector& sp,
                            const Matrix& weights, std::int64_t k,
                            const PruneConfig& cfg,
                            std::span<const std::size_t> injected = {});

}  // namespace quantprune
