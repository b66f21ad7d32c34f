// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "quantprune/matrix.hpp"
#include "quantprune/quant.hpp"

namespace quantprune {

enum class ScoreKind {
  group_error_e,
  outlier_r,
  hybrid_sq,
  semantic_sp,
  fused_final,
  metric_variant,
};

enum class MetricId {
  linf_norm,
  l1_norm,
  l2_norm,
  variance,
  tokenwise_absmax,
  clip_absmax,
  groupwise_absmax,
  outlier_intensity,
  combine,
};

constexpr std::array<MetricId, 9> kAllMetrics = {
    MetricId::linf_norm,        MetricId::l1_norm,
    MetricId::l2_norm,          MetricId::variance,
    MetricId::tokenwise_absmax, MetricId::clip_absmax,
    MetricId::groupwise_absmax, MetricId::outlier_intensity,
    MetricId::combine,
};

std::string_view to_string(MetricId id);
MetricId metric_from_string(std::string_view name);

// Per-token score of length N. `raw` keeps the pre-normalization values when
// a normalization was applied.
struct ScoreVector {
  std::vector<double> values;
  ScoreKind kind = ScoreKind::metric_variant;
  std::optional<MetricId> metric;
  bool normalized = false;
  std::vector<double> raw;

  std::size_t size() const noexcept { return values.size(); }
};

// E_i: L2 norm of the per-token reconstruction residual under group-wise
// fake quantization (symmetric simulation on the default path; cfg.scheme
// selects an asymmetric-error mode for study).
ScoreVector group_quant_error(const TokenMatrix& tokens,
                              const QuantConfig& cfg);

// R_i: spread of a token's activation values, max - min.
ScoreVector outlier_intensity(const TokenMatrix& tokens);

// (x - min)/(max - min) across the N tokens; all 0.5 when max == min.
ScoreVector minmax_normalize(const ScoreVector& scores);

// S^Q_i = 0.5*norm(E)_i + 0.5*norm(R)_i, in [0, 1].
ScoreVector hybrid_sensitivity(const TokenMatrix& tokens,
                               const QuantConfig& cfg);

// The nine sensitivity variants. Raw (unnormalized) scores except `combine`,
// which is the already-normalized hybrid.
ScoreVector metric_score(const TokenMatrix& tokens, MetricId metric,
                         const QuantConfig& cfg);

}  // namespace quantprune
