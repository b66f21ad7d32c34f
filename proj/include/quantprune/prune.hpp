// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quantprune/matrix.hpp"
#include "quantprune/quant.hpp"
#include "quantprune/sensitivity.hpp"

namespace quantprune {

struct PruneConfig {
  double alpha = 0.5;       // semantic weight in the fused score
  std::int64_t keep = 1;    // K, tokens to retain
  MetricId metric = MetricId::combine;
  QuantConfig quant;

  void validate() const;
};

struct TopkSelection {
  std::vector<std::size_t> selected;    // ascending original order
  std::vector<std::size_t> rank_order;  // descending score, ties by index
  bool clamped = false;                 // k exceeded N
};

struct PruneResult {
  std::vector<std::size_t> selected_indices;
  std::vector<std::size_t> rank_order;
  std::vector<double> semantic_raw;
  std::vector<double> semantic_norm;
  std::vector<double> quant_sensitivity;
  std::vector<double> fused;
  PruneConfig config;
  bool keep_clamped = false;
  std::size_t k_requested = 0;
  std::size_t k_effective = 0;
};

// S^Final = alpha*S^P + (1-alpha)*S^Q, element-wise. Both inputs must be
// normalized and of equal length.
ScoreVector fuse_scores(const ScoreVector& sp, const ScoreVector& sq,
                        double alpha);

// Highest min(k, N) scores; ties broken toward the lower original index;
// selected indices emitted ascending to preserve sequence order.
TopkSelection select_topk(const ScoreVector& scores, std::int64_t k);

// Built-in S^P: cosine similarity against a query vector, min-max normalized.
// Zero-norm token rows score raw cosine 0.
ScoreVector semantic_score_cosine(const TokenMatrix& tokens,
                                  std::span<const double> query);

// Ingests an externally produced S^P vector: validated, then normalized.
ScoreVector load_external_semantic_scores(std::span<const double> values,
                                          std::size_t n_tokens);

// Full pipeline: sensitivity metric -> normalization -> fusion -> top-K.
PruneResult prune(const TokenMatrix& tokens, const ScoreVector& sp,
                  const PruneConfig& cfg);

}  // namespace quantprune
