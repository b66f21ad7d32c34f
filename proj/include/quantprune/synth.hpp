// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "quantprune/matrix.hpp"
#include "quantprune/prune.hpp"
#include "quantprune/rng.hpp"

namespace quantprune {

struct SyntheticSpec {
  std::size_t n_tokens = 256;
  std::size_t dim = 1024;
  double base_scale = 1.0;
  std::size_t n_outlier_tokens = 4;
  double outlier_magnitude = 20.0;
  std::size_t outlier_channels_per_token = 32;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticTokens {
  TokenMatrix tokens;
  std::vector<std::size_t> outlier_tokens;  // ascending
};

// Background: gaussian_like()*base_scale, row-major. Each outlier token gets
// one contiguous block of outlier_channels_per_token channels set to
// sign*magnitude*base_scale; block start is a multiple of the block width,
// sign drawn per token. Values are snapped to float32 so a round trip
// through a tensor file is exact. Draw order (fixed for reproducibility):
// background, outlier token picks, then per-token (sign, block start).
SyntheticTokens gen_synthetic_tokens(const SyntheticSpec& spec);

// Self-contained instance for the comparison/ablation harness: tokens plus a
// cosine S^P against a query vector and a Gaussian-like weight matrix, both
// drawn from the same stream right after token generation.
struct CorpusInstance {
  TokenMatrix tokens;
  std::vector<std::size_t> outlier_tokens;
  ScoreVector semantic;
  Matrix weights;  // dim x weight_cols
};

CorpusInstance make_corpus_instance(const SyntheticSpec& spec,
                                    std::size_t weight_cols = 64);

// Teaser-style instance: one designated token holds the strongest outlier
// block (provably maximal E and R against the bounded background) but the
// minimal semantic score, so it is dropped at alpha=1 and kept at alpha=0.5.
struct AdversarialInstance {
  TokenMatrix tokens;
  ScoreVector semantic;
  std::size_t expected_index = 0;
  std::int64_t keep = 0;
};

AdversarialInstance adversarial_instance(std::uint64_t seed);

}  // namespace quantprune
