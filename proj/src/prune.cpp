// SPDX-License-Identifier: Apache-2.0

#include "quantprune/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quantprune/errors.hpp"

namespace quantprune {

void PruneConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (keep < 1) throw ConfigError("keep must be >= 1");
  quant.validate();
}

ScoreVector fuse_scores(const ScoreVector& sp, const ScoreVector& sq,
                        double alpha) {
  if (sp.values.size() != sq.values.size()) {
    throw DataError("fuse_scores: score lengths disagree (" +
                    std::to_string(sp.values.size()) + " vs " +
                    std::to_string(sq.values.size()) + ")");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (!sp.normalized || !sq.normalized) {
    throw ConfigError("fuse_scores requires normalized inputs");
  }
  ScoreVector out;
  out.kind = ScoreKind::fused_final;
  out.normalized = true;
  out.values.resize(sp.values.size());
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < sp.values.size(); ++i) {
    out.values[i] = alpha * sp.values[i] + beta * sq.values[i];
  }
  return out;
}

TopkSelection select_topk(const ScoreVector& scores, std::int64_t k) {
  if (k < 1) throw ConfigError("select_topk: k must be >= 1");
  const std::size_t n = scores.values.size();
  if (n == 0) throw DataError("select_topk: empty score vector");

  TopkSelection sel;
  sel.clamped = static_cast<std::size_t>(k) > n;
  const std::size_t take = sel.clamped ? n : static_cast<std::size_t>(k);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.values[a] != scores.values[b]) {
      return scores.values[a] > scores.values[b];
    }
    return a < b;
  });
  sel.rank_order.assign(order.begin(), order.begin() + take);
  sel.selected = sel.rank_order;
  std::sort(sel.selected.begin(), sel.selected.end());
  return sel;
}

ScoreVector semantic_score_cosine(const TokenMatrix& tokens,
                                  std::span<const double> query) {
  if (query.size() != tokens.dim()) {
    throw DataError("query dimension does not match token channels");
  }
  double qnorm = 0.0;
  for (double v : query) {
    if (!std::isfinite(v)) throw DataError("query contains non-finite values");
    qnorm += v * v;
  }
  qnorm = std::sqrt(qnorm);
  if (qnorm == 0.0) throw ConfigError("query vector must not be all-zero");

  ScoreVector raw;
  raw.kind = ScoreKind::semantic_sp;
  raw.values.resize(tokens.count());
  for (std::size_t i = 0; i < tokens.count(); ++i) {
    auto row = tokens.data.row(i);
    double dot = 0.0;
    double norm = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      dot += row[j] * query[j];
      norm += row[j] * row[j];
    }
    norm = std::sqrt(norm);
    raw.values[i] = norm == 0.0 ? 0.0 : dot / (norm * qnorm);
  }
  ScoreVector out = minmax_normalize(raw);
  out.kind = ScoreKind::semantic_sp;
  return out;
}

ScoreVector load_external_semantic_scores(std::span<const double> values,
                                          std::size_t n_tokens) {
  if (values.size() != n_tokens) {
    throw DataError("semantic score length " + std::to_string(values.size()) +
                    " does not match token count " + std::to_string(n_tokens));
  }
  ScoreVector raw;
  raw.kind = ScoreKind::semantic_sp;
  raw.values.assign(values.begin(), values.end());
  for (double v : raw.values) {
    if (!std::isfinite(v)) {
      throw DataError("semantic scores contain non-finite values");
    }
  }
  ScoreVector out = minmax_normalize(raw);
  out.kind = ScoreKind::semantic_sp;
  return out;
}

PruneResult prune(const TokenMatrix& tokens, const ScoreVector& sp,
                  const PruneConfig& cfg) {
  cfg.validate();
  if (sp.values.size() != tokens.count()) {
    throw DataError("semantic score length does not match token count");
  }

  ScoreVector sp_norm = sp.normalized ? sp : minmax_normalize(sp);
  ScoreVector sq = metric_score(tokens, cfg.metric, cfg.quant);
  // combine is already the normalized hybrid and enters the fusion as-is;
  // the other variants are normalized here.
  ScoreVector sq_norm = sq.normalized ? sq : minmax_normalize(sq);
  ScoreVector fused = fuse_scores(sp_norm, sq_norm, cfg.alpha);
  TopkSelection sel = select_topk(fused, cfg.keep);

  PruneResult result;
  result.selected_indices = std::move(sel.selected);
  result.rank_order = std::move(sel.rank_order);
  result.semantic_raw = sp_norm.raw.empty() ? sp_norm.values : sp_norm.raw;
  result.semantic_norm = sp_norm.values;
  result.quant_sensitivity = sq_norm.values;
  result.fused = fused.values;
  result.config = cfg;
  result.keep_clamped = sel.clamped;
  result.k_requested = static_cast<std::size_t>(cfg.keep);
  result.k_effective = result.selected_indices.size();
  return result;
}

}  // namespace quantprune
