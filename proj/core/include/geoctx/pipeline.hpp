#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geoctx/dataset.hpp"
#include "geoctx/quotient.hpp"
#include "geoctx/variant.hpp"

namespace geoctx {

inline constexpr const char* kBaselineArm = "gwn";

// match_sensors -> build_quotient -> prune_clusters(epsilon).
QuotientGraph build_traffic_graph(const RoadGraph& road, const SensorSet& sensors, double epsilon,
                                  DistanceMetric metric = DistanceMetric::Euclidean);

// The configured dataset, or the synthetic city when none is given. Relative
// dataset paths resolve against `base`.
Dataset resolve_dataset(const VariantConfig& cfg, const std::filesystem::path& base = {});

struct MetricRow {
  std::string variant;
  std::uint64_t seed = 0;
  std::string horizon_step;  // "1".."T" or "all"
  double mae = 0.0;
};

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);

struct RunOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  bool save_checkpoints = true;
};

// Full experiment for every seed in cfg.seeds: pre-train the encoder, embed
// all sensors, train the baseline and the SGA arm, evaluate on the test
// split. Writes <out>/metrics.csv (`variant,seed,horizon_step,mae`, baseline
// arm named "gwn"), <out>/config.toml and per-seed histories under
// <out>/seed-<k>/. Seeds run in a worker pool; output does not depend on
// scheduling.
std::vector<MetricRow> run_variant(const VariantConfig& cfg, const Dataset& data,
                                   const std::filesystem::path& out, const RunOptions& opts = {});

}  // namespace geoctx
