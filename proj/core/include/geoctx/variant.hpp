#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoctx/encoder.hpp"
#include "geoctx/features.hpp"
#include "geoctx/forecaster.hpp"
#include "geoctx/geo.hpp"
#include "geoctx/synthetic_city.hpp"

namespace geoctx {

// One experiment: the variant grid columns at the top level, then training
// settings. Text form is TOML-shaped:
//
//   name = "lr-0003"
//   features = 2
//   epsilon = 0.01
//   subgraph = 64          # or "full"
//   hidden_dim = 320
//   lr = 0.0003
//   graphnorm = true
//   [pretrain] epochs, batch, temperature, d_fc1, d_fc2, gcn_layers, readout
//   [forecaster] s, t, d_h, layers, epochs, lr, batch_size, windows_per_epoch,
//                val_windows, adaptive, adaptive_rank
//   [run] seeds, dataset, train, val, test, amenity_radius, metric
//   [city] seed, sensors, road_nodes, days, dense_fraction, missing_rate
struct VariantConfig {
  std::string name = "variant";
  std::size_t features = 2;
  double epsilon = 0.01;
  std::size_t subgraph = 64;  // kFullSubgraph for "full"
  std::size_t hidden_dim = 320;
  double lr = 3e-4;
  bool graphnorm = true;

  std::size_t pre_epochs = 50;
  std::size_t pre_batch = 64;
  double temperature = 0.5;
  std::size_t d_fc1 = 64;
  std::size_t d_fc2 = 32;
  std::size_t gcn_layers = 2;
  bool mean_pool = false;

  ForecastConfig forecast;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<std::filesystem::path> dataset;  // synthetic city when absent
  SplitSpec split;
  double amenity_radius = 0.005;
  DistanceMetric metric = DistanceMetric::Euclidean;

  CityParams city;

  EncoderConfig encoder() const;
  FeatureSpec feature_spec() const;
  void validate() const;  // BadConfig / ParameterOutOfRange

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

VariantConfig parse_variant_config(std::string_view text);  // BadConfig with line numbers
VariantConfig load_variant_config(const std::filesystem::path& path);
std::string format_variant_config(const VariantConfig& cfg);

// The full variant grid (features-1..5, larger-radius, larger-subgraph,
// less-hidden, lr-0001, lr-0003, lr-0010, no-graph-norm): 10 seeds, 50
// pre-training epochs, 100 forecaster epochs.
std::vector<VariantConfig> full_grid();

}  // namespace geoctx
