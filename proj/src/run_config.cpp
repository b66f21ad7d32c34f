// SPDX-License-Identifier: Apache-2.0

#include "quantprune/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quantprune/errors.hpp"

namespace quantprune {

namespace {

using Json = nlohmann::json;

template <typename T>
void take(const Json& j, const char* key, std::optional<T>& slot) {
  if (!j.contains(key)) return;
  try {
    slot = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

}  // namespace

RunConfigFile parse_run_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");

  static const char* known[] = {
      "bits",       "group_size",      "scheme",
      "epsilon",    "rounding",        "clip_percentile",
      "alpha",      "keep",            "metric",
      "n_tokens",   "dim",             "base_scale",
      "n_outlier_tokens", "outlier_magnitude",
      "outlier_channels_per_token", "seed",
  };
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfigFile cfg;
  take(j, "bits", cfg.bits);
  take(j, "group_size", cfg.group_size);
  take(j, "scheme", cfg.scheme);
  take(j, "epsilon", cfg.epsilon);
  take(j, "rounding", cfg.rounding);
  take(j, "clip_percentile", cfg.clip_percentile);
  take(j, "alpha", cfg.alpha);
  take(j, "metric", cfg.metric);
  take(j, "n_tokens", cfg.n_tokens);
  take(j, "dim", cfg.dim);
  take(j, "base_scale", cfg.base_scale);
  take(j, "n_outlier_tokens", cfg.n_outlier_tokens);
  take(j, "outlier_magnitude", cfg.outlier_magnitude);
  take(j, "outlier_channels_per_token", cfg.outlier_channels_per_token);
  take(j, "seed", cfg.seed);

  // keep may be a JSON integer count or a string (count or ratio form).
  if (j.contains("keep")) {
    const Json& k = j.at("keep");
    if (k.is_number_integer()) {
      cfg.keep = std::to_string(k.get<std::int64_t>());
    } else if (k.is_string()) {
      cfg.keep = k.get<std::string>();
    } else {
      throw ConfigError("config key 'keep' must be an integer or string");
    }
  }
  return cfg;
}

RunConfigFile load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::int64_t resolve_keep(const std::string& keep_text, std::size_t n_tokens) {
  constexpr std::string_view kRatioPrefix = "ratio:";
  if (keep_text.rfind(kRatioPrefix, 0) == 0) {
    std::string number = keep_text.substr(kRatioPrefix.size());
    std::size_t used = 0;
    double ratio = 0.0;
    try {
      ratio = std::stod(number, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad keep ratio '" + keep_text + "'");
    }
    if (used != number.size() || !(ratio > 0.0) || ratio > 1.0) {
      throw ConfigError("keep ratio must lie in (0, 1], got '" + keep_text +
                        "'");
    }
    auto k = static_cast<std::int64_t>(
        std::floor(ratio * static_cast<double>(n_tokens)));
    return k < 1 ? 1 : k;
  }
  std::size_t used = 0;
  long long count = 0;
  try {
    count = std::stoll(keep_text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad keep count '" + keep_text + "'");
  }
  if (used != keep_text.size() || count < 1) {
    throw ConfigError("keep count must be a positive integer, got '" +
                      keep_text + "'");
  }
  return count;
}

}  // namespace quantprune
