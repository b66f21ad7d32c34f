// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "oracle.hpp"
#include "quantprune/errors.hpp"
#include "quantprune/rng.hpp"
#include "quantprune/sensitivity.hpp"

using namespace quantprune;

namespace {

TokenMatrix tokens_from(std::size_t n, std::size_t d,
                        std::vector<double> values) {
  return make_token_matrix(Matrix(n, d, std::move(values)));
}

TokenMatrix random_tokens(PortableRng& rng, std::size_t n, std::size_t d,
                          double scale = 1.0) {
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      m(i, j) = snap_to_f32(rng.gaussian_like() * scale);
    }
  }
  return make_token_matrix(std::move(m));
}

QuantConfig eps0() {
  QuantConfig cfg;
  cfg.epsilon = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("group quant error E") {
  QuantConfig cfg = eps0();
  cfg.group_size = 3;

  // Zero token and a grid-exact token both give E = 0.
  auto zero = tokens_from(1, 3, {0.0, 0.0, 0.0});
  CHECK(group_quant_error(zero, cfg).values[0] == 0.0);

  // Entries are multiples of s = 0.25 with max |v| = 7*0.25.
  auto grid = tokens_from(1, 3, {1.75, -0.25, 0.75});
  CHECK(group_quant_error(grid, cfg).values[0] == 0.0);

  // Residual norm matches the scalar brute-force oracle.
  std::vector<double> vals = {1.0, 0.52, -0.25};
  auto tm = tokens_from(1, 3, std::vector<double>(vals));
  auto ref = oracle::ref_fakequant_row(vals, 4, 3, 0.0, true,
                                       Rounding::half_away_from_zero);
  double expected = oracle::ref_l2_diff(vals, ref);
  CHECK(group_quant_error(tm, cfg).values[0] == expected);
  CHECK(expected > 0.0);
}

TEST_CASE("outlier intensity R") {
  auto tm = tokens_from(3, 3, {3.0, -1.0, 2.0,    // spread 4
                               5.0, 5.0, 5.0,     // constant
                               0.0, 0.0, 0.0});   // zero
  auto r = outlier_intensity(tm);
  CHECK(r.values[0] == 4.0);
  CHECK(r.values[1] == 0.0);
  CHECK(r.values[2] == 0.0);

  auto single = tokens_from(1, 1, {42.0});
  CHECK(outlier_intensity(single).values[0] == 0.0);
}

TEST_CASE("minmax normalization") {
  ScoreVector v;
  v.values = {2.0, 4.0, 6.0};
  auto n = minmax_normalize(v);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 0.5);
  CHECK(n.values[2] == 1.0);
  CHECK(n.normalized);
  CHECK(n.raw == std::vector<double>{2.0, 4.0, 6.0});

  v.values = {7.0, 7.0, 7.0};
  n = minmax_normalize(v);
  for (double x : n.values) CHECK(x == 0.5);

  v.values = {0.0, 1.0};
  n = minmax_normalize(v);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 1.0);
}

TEST_CASE("hybrid sensitivity") {
  QuantConfig cfg;

  // Single token: both normalizations degenerate to 0.5.
  PortableRng rng(5);
  auto one = random_tokens(rng, 1, 8);
  auto sq1 = hybrid_sensitivity(one, cfg);
  CHECK(sq1.values[0] == 0.5);

  // An injected outlier token maximizes both E and R, hence S^Q.
  auto tm = random_tokens(rng, 4, 16);
  for (std::size_t j = 0; j < 4; ++j) tm.data(2, j) = 50.0;
  auto sq = hybrid_sensitivity(tm, cfg);
  CHECK(sq.values[2] == 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sq.values[i] >= 0.0);
    CHECK(sq.values[i] <= 1.0);
    if (i != 2) CHECK(sq.values[i] < sq.values[2]);
  }

  // Co-monotone E and R rankings carry through to S^Q.
  auto ranked = tokens_from(3, 2, {0.0, 1.0, 0.0, 2.0, 0.0, 4.0});
  auto sqr = hybrid_sensitivity(ranked, eps0());
  CHECK(sqr.values[0] < sqr.values[1]);
  CHECK(sqr.values[1] < sqr.values[2]);
}

TEST_CASE("metric registry") {
  QuantConfig cfg;
  PortableRng rng(6);
  auto tm = random_tokens(rng, 5, 12);

  for (MetricId id : kAllMetrics) {
    auto s = metric_score(tm, id, cfg);
    CHECK(s.values.size() == 5);
    CHECK(s.metric == id);
    CHECK(metric_from_string(to_string(id)) == id);
  }
  CHECK_THROWS_AS(metric_from_string("not_a_metric"), ConfigError);

  auto l2 = metric_score(tokens_from(1, 2, {3.0, 4.0}), MetricId::l2_norm, cfg);
  CHECK(l2.values[0] == 5.0);

  auto var =
      metric_score(tokens_from(1, 3, {2.0, 2.0, 2.0}), MetricId::variance, cfg);
  CHECK(var.values[0] == 0.0);

  auto linf = metric_score(tokens_from(1, 3, {1.0, -9.0, 2.0}),
                           MetricId::linf_norm, cfg);
  CHECK(linf.values[0] == 9.0);
  auto l1 = metric_score(tokens_from(1, 3, {1.0, -9.0, 2.0}),
                         MetricId::l1_norm, cfg);
  CHECK(l1.values[0] == 12.0);
}

TEST_CASE("tokenwise vs groupwise absmax on a spiky token") {
  QuantConfig cfg = eps0();
  cfg.group_size = 4;
  // One extreme channel; the coarse per-token scale inflates residuals.
  std::vector<double> vals = {100.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  auto tm = tokens_from(1, 8, std::vector<double>(vals));
  double tokenwise =
      metric_score(tm, MetricId::tokenwise_absmax, cfg).values[0];
  double groupwise =
      metric_score(tm, MetricId::groupwise_absmax, cfg).values[0];
  CHECK(tokenwise >= groupwise);
  CHECK(tokenwise > 0.0);
}

TEST_CASE("clip absmax saturates the tail") {
  QuantConfig cfg = eps0();
  cfg.clip_percentile = 50.0;
  // Median |v| = 1, so the scale comes from the clipped range and the spike
  // saturates at the clip.
  std::vector<double> vals = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1000.0};
  auto tm = tokens_from(1, 8, std::vector<double>(vals));
  double clipped = metric_score(tm, MetricId::clip_absmax, cfg).values[0];
  // Residual is dominated by the saturated spike: 1000 - clip.
  CHECK(clipped > 990.0);
  CHECK(clipped < 1000.0);

  // p = 100 degenerates to tokenwise absmax.
  QuantConfig full = eps0();
  full.clip_percentile = 100.0;
  PortableRng rng(7);
  auto rt = random_tokens(rng, 3, 9);
  auto a = metric_score(rt, MetricId::clip_absmax, full);
  auto b = metric_score(rt, MetricId::tokenwise_absmax, full);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("permutation equivariance of metrics") {
  PortableRng rng(8);
  auto tm = random_tokens(rng, 6, 10);
  std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Matrix permuted(6, 10);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      permuted(i, j) = tm.data(perm[i], j);
    }
  }
  auto ptm = make_token_matrix(std::move(permuted));
  QuantConfig cfg;
  for (MetricId id : kAllMetrics) {
    auto base = metric_score(tm, id, cfg);
    auto moved = metric_score(ptm, id, cfg);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(moved.values[i] == base.values[perm[i]]);
    }
  }
}

TEST_CASE("power-of-two scale invariance of the hybrid score") {
  PortableRng rng(9);
  QuantConfig cfg = eps0();
  cfg.group_size = 8;
  for (int iter = 0; iter < 20; ++iter) {
    auto tm = random_tokens(rng, 8, 24);
    tm.data(static_cast<std::size_t>(rng.bounded(8)),
            static_cast<std::size_t>(rng.bounded(24))) = 9.0;
    auto base = hybrid_sensitivity(tm, cfg);
    for (double c : {0.5, 2.0, 4.0}) {
      Matrix scaled(8, 24);
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled.values()[i] = c * tm.data.values()[i];
      }
      auto got = hybrid_sensitivity(make_token_matrix(std::move(scaled)), cfg);
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(got.values[i] == base.values[i]);
      }
    }
  }
}

TEST_CASE("zero token is the raw minimum under every metric") {
  PortableRng rng(10);
  auto tm = random_tokens(rng, 5, 8);
  for (std::size_t j = 0; j < 8; ++j) tm.data(3, j) = 0.0;
  QuantConfig cfg;
  for (MetricId id : kAllMetrics) {
    if (id == MetricId::combine) continue;  // normalized, tested elsewhere
    auto s = metric_score(tm, id, cfg);
    double zero_score = s.values[3];
    CHECK(zero_score == 0.0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(s.values[i] >= zero_score);
  }
}
