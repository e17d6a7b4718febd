#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "geoctx/pipeline.hpp"

namespace geoctx {

struct SummaryRow {
  std::string variant;
  std::string horizon_step;
  std::size_t n_seeds = 0;
  double mean_mae = 0.0;
  double std_mae = 0.0;  // population standard deviation over seeds
};

// Groups by (variant, horizon_step), in first-appearance order. Duplicate
// (variant, seed, horizon_step) rows are counted once.
std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart.
std::string line_chart_svg(const std::string& title, const std::vector<Series>& series);

// Reads <run>/metrics.csv and any <run>/<sub>/metrics.csv of nested runs,
// writes <out>/summary.csv and one loss-curve SVG per history file found in
// seed directories. Throws MissingRunArtifacts when no metrics exist.
std::vector<SummaryRow> report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

}  // namespace geoctx
