// SPDX-License-Identifier: Apache-2.0

#include "quantprune/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quantprune/errors.hpp"
#include "quantprune/sensitivity.hpp"

namespace quantprune {

namespace {

// Draw order is part of the reproducibility contract: background row-major,
// outlier token picks, then per outlier token (sign, block start).
SyntheticTokens generate_tokens(PortableRng& rng, const SyntheticSpec& spec) {
  Matrix data(spec.n_tokens, spec.dim);
  for (std::size_t i = 0; i < spec.n_tokens; ++i) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      data(i, j) = snap_to_f32(rng.gaussian_like() * spec.base_scale);
    }
  }

  // Partial Fisher-Yates over [0, N) picks the outlier tokens.
  std::vector<std::size_t> pool(spec.n_tokens);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> picked;
  for (std::size_t t = 0; t < spec.n_outlier_tokens; ++t) {
    std::size_t j =
        t + static_cast<std::size_t>(rng.bounded(spec.n_tokens - t));
    std::swap(pool[t], pool[j]);
    picked.push_back(pool[t]);
  }
  std::sort(picked.begin(), picked.end());

  const std::size_t span = spec.outlier_channels_per_token;
  for (std::size_t token : picked) {
    const double sign = rng.bounded(2) == 0 ? 1.0 : -1.0;
    const std::size_t n_starts = (spec.dim - span) / span + 1;
    const std::size_t start =
        span * static_cast<std::size_t>(rng.bounded(n_starts));
    const double spike =
        snap_to_f32(sign * spec.outlier_magnitude * spec.base_scale);
    for (std::size_t j = start; j < start + span; ++j) data(token, j) = spike;
  }

  std::optional<GridShape> grid;
  auto side = static_cast<std::size_t>(
      std::llround(std::sqrt(static_cast<double>(spec.n_tokens))));
  if (side * side == spec.n_tokens) grid = GridShape{side, side};

  return SyntheticTokens{make_token_matrix(std::move(data), grid),
                         std::move(picked)};
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_tokens == 0 || dim == 0) {
    throw ConfigError("synthetic spec needs n_tokens >= 1 and dim >= 1");
  }
  if (!(base_scale > 0.0)) throw ConfigError("base_scale must be positive");
  if (n_outlier_tokens > n_tokens) {
    throw ConfigError("n_outlier_tokens exceeds n_tokens");
  }
  if (outlier_channels_per_token > dim) {
    throw ConfigError("outlier_channels_per_token exceeds dim");
  }
  if (n_outlier_tokens > 0) {
    if (!(outlier_magnitude > 1.0)) {
      throw ConfigError("outlier_magnitude must exceed 1");
    }
    if (outlier_channels_per_token == 0) {
      throw ConfigError(
          "outlier_channels_per_token must be >= 1 when "
          "outlier tokens are requested");
    }
  }
}

SyntheticTokens gen_synthetic_tokens(const SyntheticSpec& spec) {
  spec.validate();
  PortableRng rng(spec.seed);
  return generate_tokens(rng, spec);
}

CorpusInstance make_corpus_instance(const SyntheticSpec& spec,
                                    std::size_t weight_cols) {
  if (weight_cols == 0) throw ConfigError("weight_cols must be >= 1");
  spec.validate();
  PortableRng rng(spec.seed);
  SyntheticTokens synth = generate_tokens(rng, spec);

  // Query and weights continue the same stream: tokens, query, weights.
  std::vector<double> query(spec.dim);
  for (double& q : query) q = snap_to_f32(rng.gaussian_like());

  Matrix weights(spec.dim, weight_cols);
  for (std::size_t i = 0; i < spec.dim; ++i) {
    for (std::size_t j = 0; j < weight_cols; ++j) {
      weights(i, j) = snap_to_f32(rng.gaussian_like());
    }
  }

  ScoreVector sp = semantic_score_cosine(synth.tokens, query);
  return CorpusInstance{std::move(synth.tokens),
                        std::move(synth.outlier_tokens), std::move(sp),
                        std::move(weights)};
}

AdversarialInstance adversarial_instance(std::uint64_t seed) {
  constexpr std::size_t kTokens = 256;
  constexpr std::size_t kDim = 64;
  constexpr std::size_t kSpan = 8;
  constexpr std::int64_t kKeep = 32;

  PortableRng rng(seed);
  Matrix data(kTokens, kDim);
  for (std::size_t i = 0; i < kTokens; ++i) {
    for (std::size_t j = 0; j < kDim; ++j) {
      data(i, j) = snap_to_f32(rng.gaussian_like());
    }
  }

  const auto target = static_cast<std::size_t>(rng.bounded(kTokens));
  const double sign = rng.bounded(2) == 0 ? 1.0 : -1.0;
  const std::size_t start =
      kSpan * static_cast<std::size_t>(rng.bounded(kDim / kSpan));
  // Alternating 200/120 block: the 120-valued channels land far from the
  // 200-scaled grid, pinning the group error above anything the [-6, 6]
  // background can reach.
  for (std::size_t j = start; j < start + kSpan; ++j) {
    data(target, j) = sign * (j % 2 == 0 ? 200.0 : 120.0);
  }

  ScoreVector raw;
  raw.kind = ScoreKind::semantic_sp;
  raw.values.resize(kTokens);
  for (std::size_t i = 0; i < kTokens; ++i) {
    raw.values[i] = 0.7 * rng.uniform01();
  }
  raw.values[target] = 0.0;  // semantically weakest
  std::size_t anchor = static_cast<std::size_t>(rng.bounded(kTokens));
  while (anchor == target) {
    anchor = static_cast<std::size_t>(rng.bounded(kTokens));
  }
  raw.values[anchor] = 1.0;  // pins the normalization span

  TokenMatrix tokens = make_token_matrix(std::move(data), GridShape{16, 16});

  // The construction must leave the target the unique argmax of both E and R.
  QuantConfig cfg;
  ScoreVector e = group_quant_error(tokens, cfg);
  ScoreVector r = outlier_intensity(tokens);
  for (std::size_t i = 0; i < kTokens; ++i) {
    if (i == target) continue;
    if (e.values[i] >= e.values[target] || r.values[i] >= r.values[target]) {
      throw DataError("adversarial construction lost outlier dominance");
    }
  }

  ScoreVector sp = minmax_normalize(raw);
  sp.kind = ScoreKind::semantic_sp;
  return AdversarialInstance{std::move(tokens), std::move(sp), target, kKeep};
}

}  // namespace quantprune
