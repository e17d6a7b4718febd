#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "geoctx/nn/tensor.hpp"
#include "geoctx/road_graph.hpp"

namespace geoctx {

enum class Feature { MaxSpeed, Amenities, Lanes, X, Y };

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

// Ordered feature selection. first_n(F) takes the first F of
// [maxspeed, amenities, lanes, x, y].
struct FeatureSpec {
  std::vector<Feature> features = {Feature::MaxSpeed, Feature::Amenities};
  double amenity_radius = 0.005;  // degrees

  static FeatureSpec first_n(std::size_t count, double amenity_radius = 0.005);
  std::size_t size() const { return features.size(); }
  void validate() const;  // ParameterOutOfRange
};

struct FeatureMatrix {
  std::vector<std::int64_t> node_ids;  // row order
  std::vector<Feature> features;       // column order
  nn::Tensor2 values;
};

// Per-node extraction. Edge-borne features take the maximum over every
// incident edge (as u or v) carrying the value, 0 when none does; x/y are the
// node coordinates; amenities counts points within amenity_radius.
class FeatureExtractor {
 public:
  FeatureExtractor(const RoadGraph& road, std::span<const AmenityPoint> amenities,
                   FeatureSpec spec);

  const FeatureSpec& spec() const { return spec_; }
  FeatureMatrix extract(std::span<const std::int64_t> node_ids) const;  // UnknownNodeId
  // Row for one road node position (no id lookup).
  void extract_row(std::size_t node_pos, double* out) const;

 private:
  const RoadGraph* road_;
  RoadIndex index_;
  FeatureSpec spec_;
  std::vector<double> amenity_count_;  // per road node position, when selected
};

FeatureMatrix extract_raw_features(const RoadGraph& road, std::span<const AmenityPoint> amenities,
                                   std::span<const std::int64_t> node_ids, const FeatureSpec& spec);

struct ScalerBounds {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> constant;

  std::size_t size() const { return min.size(); }
};

ScalerBounds fit_scaler(const FeatureMatrix& raw);
// (x - min) / (max - min) clamped to [0, 1]; constant columns map to 0.
// Throws DimensionMismatch on a column-count mismatch.
FeatureMatrix apply_scaler(const FeatureMatrix& raw, const ScalerBounds& bounds);
void apply_scaler_inplace(nn::Tensor2& values, const ScalerBounds& bounds);

// `road_node_id,<feature names...>`
void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path);

}  // namespace geoctx
