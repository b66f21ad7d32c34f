// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "quantprune/evaluate.hpp"
#include "quantprune/matrix.hpp"
#include "quantprune/prune.hpp"

namespace quantprune {

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(std::string_view name);

// Provenance of the tensor files feeding a run, embedded in every report.
struct InputRecord {
  std::string role;    // tokens, semantic, weights, ...
  std::string path;
  std::string digest;  // fnv1a64:<16 hex>
  std::vector<std::size_t> shape;
};

using InputManifest = std::vector<InputRecord>;

// Renderers are pure: identical logical inputs give identical bytes.
std::string render_report(const PruneResult& result,
                          const InputManifest& inputs, ReportFormat format);
std::string render_report(const ComparisonReport& report,
                          const InputManifest& inputs, ReportFormat format);
std::string render_report(const AblationReport& report,
                          const InputManifest& inputs, ReportFormat format);

// Row-major CSV grid; requires grid.rows * grid.cols == scores.size().
std::string render_heatmap_grid(const ScoreVector& scores, GridShape grid);

void emit_report(const PruneResult& result, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format);
void emit_report(const ComparisonReport& report, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format);
void emit_report(const AblationReport& report, const InputManifest& inputs,
                 const std::filesystem::path& path, ReportFormat format);
void emit_heatmap_grid(const ScoreVector& scores, GridShape grid,
                       const std::filesystem::path& path);

// write-temp-then-rename
void write_text_atomic(const std::filesystem::path& path,
                       std::string_view text);

std::string fnv1a64_hex(std::span<const unsigned char> bytes);
std::string digest_file(const std::filesystem::path& path);

}  // namespace quantprune
