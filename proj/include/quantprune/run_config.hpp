// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "quantprune/prune.hpp"
#include "quantprune/synth.hpp"

namespace quantprune {

// Values parsed from a JSON run-config file. Every field mirrors a
// QuantConfig, PruneConfig or SyntheticSpec field by name; unknown keys are
// rejected. Unset fields fall back to built-in defaults; explicit CLI flags
// override both.
struct RunConfigFile {
  std::optional<int> bits;
  std::optional<int> group_size;
  std::optional<std::string> scheme;
  std::optional<double> epsilon;
  std::optional<std::string> rounding;
  std::optional<double> clip_percentile;

  std::optional<double> alpha;
  std::optional<std::string> keep;  // count or "ratio:<r>"
  std::optional<std::string> metric;

  std::optional<std::size_t> n_tokens;
  std::optional<std::size_t> dim;
  std::optional<double> base_scale;
  std::optional<std::size_t> n_outlier_tokens;
  std::optional<double> outlier_magnitude;
  std::optional<std::size_t> outlier_channels_per_token;
  std::optional<std::uint64_t> seed;
};

RunConfigFile parse_run_config(const std::string& json_text);
RunConfigFile load_run_config(const std::filesystem::path& path);

// Count ("32") or ratio ("ratio:0.125") form; the ratio resolves to
// floor(ratio*n_tokens) with a minimum of 1.
std::int64_t resolve_keep(const std::string& keep_text, std::size_t n_tokens);

}  // namespace quantprune
