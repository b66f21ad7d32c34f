// SPDX-License-Identifier: Apache-2.0

#include "quantprune/report.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "quantprune/errors.hpp"
#include "quantprune/version.hpp"

namespace quantprune {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Json quant_json(const QuantConfig& cfg) {
  Json j;
  j["bits"] = cfg.bits;
  j["group_size"] = cfg.group_size;
  j["scheme"] = to_string(cfg.scheme);
  j["epsilon"] = cfg.epsilon;
  j["rounding"] = to_string(cfg.rounding);
  j["clip_percentile"] = cfg.clip_percentile;
  return j;
}

Json prune_config_json(const PruneConfig& cfg) {
  Json j;
  j["alpha"] = cfg.alpha;
  j["keep"] = cfg.keep;
  j["metric"] = to_string(cfg.metric);
  j["quant"] = quant_json(cfg.quant);
  return j;
}

Json inputs_json(const InputManifest& inputs) {
  Json j = Json::object();
  for (const InputRecord& record : inputs) {
    Json entry;
    entry["path"] = record.path;
    entry["digest"] = record.digest;
    entry["shape"] = record.shape;
    j[record.role] = entry;
  }
  return j;
}

Json base_json(const InputManifest& inputs) {
  Json j;
  j["version"] = kVersion;
  j["config"] = nullptr;
  j["inputs"] = inputs_json(inputs);
  return j;
}

std::string csv_int_list(std::span<const std::size_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw ConfigError("unknown report format: " + std::string(name));
}

std::string render_report(const PruneResult& result,
                          const InputManifest& inputs, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out =
        "token,semantic_raw,semantic,quant_sensitivity,final,selected\n";
    std::vector<char> selected(result.semantic_norm.size(), 0);
    for (std::size_t idx : result.selected_indices) selected[idx] = 1;
    for (std::size_t i = 0; i < result.semantic_norm.size(); ++i) {
      out += std::to_string(i);
      out += ',';
      out += format_double(result.semantic_raw[i]);
      out += ',';
      out += format_double(result.semantic_norm[i]);
      out += ',';
      out += format_double(result.quant_sensitivity[i]);
      out += ',';
      out += format_double(result.fused[i]);
      out += ',';
      out += selected[i] ? '1' : '0';
      out += '\n';
    }
    return out;
  }

  Json j = base_json(inputs);
  j["config"] = prune_config_json(result.config);
  Json scores;
  scores["semantic_raw"] = result.semantic_raw;
  scores["semantic"] = result.semantic_norm;
  scores["quant_sensitivity"] = result.quant_sensitivity;
  scores["final"] = result.fused;
  j["scores"] = scores;
  Json selection;
  selection["selected_indices"] = result.selected_indices;
  selection["rank_order"] = result.rank_order;
  selection["k_requested"] = result.k_requested;
  selection["k_effective"] = result.k_effective;
  selection["clamped"] = result.keep_clamped;
  j["selection"] = selection;
  return j.dump(2) + "\n";
}

std::string render_report(const ComparisonReport& report,
                          const InputManifest& inputs, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out =
        "strategy,alpha,keep,retained_fakequant_error,downstream_proxy_error,"
        "outliers_retained\n";
    for (const StrategyRow& row : report.strategies) {
      out += row.name;
      out += ',';
      out += format_double(row.alpha);
      out += ',';
      out += std::to_string(report.keep);
      out += ',';
      out += format_double(row.errors.retained_fakequant_error);
      out += ',';
      out += format_double(row.errors.downstream_proxy_error);
      out += ',';
      out += row.outliers_retained ? std::to_string(*row.outliers_retained)
                                   : std::string();
      out += '\n';
    }
    return out;
  }

  Json j = base_json(inputs);
  Json config = prune_config_json(report.config);
  config["keep"] = report.keep;
  if (report.seed) config["seed"] = *report.seed;
  j["config"] = config;
  Json strategies = Json::array();
  for (const StrategyRow& row : report.strategies) {
    Json r;
    r["name"] = row.name;
    r["alpha"] = row.alpha;
    r["selected_indices"] = row.selected;
    r["retained_fakequant_error"] = row.errors.retained_fakequant_error;
    r["downstream_proxy_error"] = row.errors.downstream_proxy_error;
    if (row.outliers_retained) {
      r["outliers_retained"] = *row.outliers_retained;
    } else {
      r["outliers_retained"] = nullptr;
    }
    strategies.push_back(r);
  }
  j["strategies"] = strategies;
  return j.dump(2) + "\n";
}

std::string render_report(const AblationReport& report,
                          const InputManifest& inputs, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out =
        "metric,keep,retained_fakequant_error,downstream_proxy_error,"
        "outliers_retained\n";
    for (const AblationRow& row : report.rows) {
      out += std::string(to_string(row.metric));
      out += ',';
      out += std::to_string(report.keep);
      out += ',';
      out += format_double(row.errors.retained_fakequant_error);
      out += ',';
      out += format_double(row.errors.downstream_proxy_error);
      out += ',';
      out += row.outliers_retained ? std::to_string(*row.outliers_retained)
                                   : std::string();
      out += '\n';
    }
    return out;
  }

  Json j = base_json(inputs);
  Json config = prune_config_json(report.config);
  config["keep"] = report.keep;
  if (report.seed) config["seed"] = *report.seed;
  j["config"] = config;
  Json rows = Json::array();
  for (const AblationRow& row : report.rows) {
    Json r;
    r["metric"] = to_string(row.metric);
    r["selected_indices"] = row.selected;
    r["retained_fakequant_error"] = row.errors.retained_fakequant_error;
    r["downstream_proxy_error"] = row.errors.downstream_proxy_error;
    if (row.outliers_retained) {
      r["outliers_retained"] = *row.outliers_retained;
    } else {
      r["outliers_retained"] = nullptr;
    }
    rows.push_back(r);
  }
  j["metrics"] = rows;
  Json ranking = Json::array();
  for (MetricId id : report.ranking) ranking.push_back(to_string(id));
  j["ranking"] = ranking;
  return j.dump(2) + "\n";
}

std::string render_heatmap_grid(const ScoreVector& scores, GridShape grid) {
  if (grid.rows * grid.cols != scores.values.size()) {
    throw DataError("grid shape " + std::to_string(grid.rows) + "x" +
                    std::to_string(grid.cols) + " does not cover " +
                    std::to_string(scores.values.size()) + " scores");
  }
  std::string out;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c) out += ',';
      out += format_double(scores.values[r * grid.cols + c]);
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path,
                       std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " into place: " +
                  ec.message());
  }
}

void emit_report(const PruneResult& result, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format) {
  write_text_atomic(path, render_report(result, inputs, format));
}

void emit_report(const ComparisonReport& report, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format) {
  write_text_atomic(path, render_report(report, inputs, format));
}

void emit_report(const AblationReport& report, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format) {
  write_text_atomic(path, render_report(report, inputs, format));
}

void emit_heatmap_grid(const ScoreVector& scores, GridShape grid,
                       const std::filesystem::path& path) {
  write_text_atomic(path, render_heatmap_grid(scores, grid));
}

std::string fnv1a64_hex(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xf];
    hash >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for digest");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return "fnv1a64:" + fnv1a64_hex(bytes);
}

}  // namespace quantprune
