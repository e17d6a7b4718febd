#include "geoctx/features.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/spatial_index.hpp"

namespace geoctx {

namespace {

constexpr Feature kFeatureOrder[] = {Feature::MaxSpeed, Feature::Amenities, Feature::Lanes,
                                     Feature::X, Feature::Y};

std::vector<Point2> amenity_points(std::span<const AmenityPoint> amenities) {
  std::vector<Point2> pts;
  pts.reserve(amenities.size());
  for (const auto& a : amenities) pts.push_back({a.lon, a.lat});
  return pts;
}

}  // namespace

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::MaxSpeed: return "maxspeed";
    case Feature::Amenities: return "amenities";
    case Feature::Lanes: return "lanes";
    case Feature::X: return "x";
    case Feature::Y: return "y";
  }
  return "?";
}

std::optional<Feature> parse_feature(std::string_view name) {
  for (Feature f : kFeatureOrder) {
    if (feature_name(f) == name) return f;
  }
  return std::nullopt;
}

FeatureSpec FeatureSpec::first_n(std::size_t count, double amenity_radius) {
  if (count < 1 || count > std::size(kFeatureOrder)) {
    throw Error(ErrorKind::ParameterOutOfRange, "feature count must be in 1..5");
  }
  FeatureSpec spec;
  spec.features.assign(std::begin(kFeatureOrder), std::begin(kFeatureOrder) + static_cast<std::ptrdiff_t>(count));
  spec.amenity_radius = amenity_radius;
  return spec;
}

void FeatureSpec::validate() const {
  if (features.empty()) throw Error(ErrorKind::ParameterOutOfRange, "feature spec is empty");
  std::set<Feature> seen(features.begin(), features.end());
  if (seen.size() != features.size()) {
    throw Error(ErrorKind::ParameterOutOfRange, "duplicate feature names");
  }
  if (!(amenity_radius >= 0.0)) {
    throw Error(ErrorKind::ParameterOutOfRange, "amenity radius must be >= 0");
  }
}

FeatureExtractor::FeatureExtractor(const RoadGraph& road, std::span<const AmenityPoint> amenities,
                                   FeatureSpec spec)
    : road_(&road), index_(road), spec_(std::move(spec)) {
  spec_.validate();
  if (std::find(spec_.features.begin(), spec_.features.end(), Feature::Amenities) == spec_.features.end()) return;
  const KdTree2 tree(amenity_points(amenities));
  amenity_count_.reserve(road.nodes.size());
  for (const auto& n : road.nodes) {
    amenity_count_.push_back(static_cast<double>(tree.count_within({n.lon, n.lat}, spec_.amenity_radius)));
  }
}

void FeatureExtractor::extract_row(std::size_t node_pos, double* out) const {
  const RoadNode& node = road_->nodes[node_pos];
  for (std::size_t j = 0; j < spec_.features.size(); ++j) {
    double value = 0.0;
    switch (spec_.features[j]) {
      case Feature::MaxSpeed:
        for (std::size_t e : index_.incident_edges(node_pos)) {
          if (const auto& s = road_->edges[e].maxspeed) value = std::max(value, *s);
        }
        break;
      case Feature::Lanes:
        for (std::size_t e : index_.incident_edges(node_pos)) {
          if (const auto& l = road_->edges[e].lanes) value = std::max(value, static_cast<double>(*l));
        }
        break;
      case Feature::Amenities:
        value = amenity_count_[node_pos];
        break;
      case Feature::X:
        value = node.lon;
        break;
      case Feature::Y:
        value = node.lat;
        break;
    }
    out[j] = value;
  }
}

FeatureMatrix FeatureExtractor::extract(std::span<const std::int64_t> node_ids) const {
  FeatureMatrix m;
  m.node_ids.assign(node_ids.begin(), node_ids.end());
  m.features = spec_.features;
  m.values.resize(static_cast<Eigen::Index>(node_ids.size()),
                  static_cast<Eigen::Index>(spec_.features.size()));
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const auto pos = index_.position(node_ids[i]);
    if (!pos) throw Error(ErrorKind::UnknownNodeId, "road node id " + std::to_string(node_ids[i]));
    extract_row(*pos, m.values.row(static_cast<Eigen::Index>(i)).data());
  }
  return m;
}

FeatureMatrix extract_raw_features(const RoadGraph& road, std::span<const AmenityPoint> amenities,
                                   std::span<const std::int64_t> node_ids, const FeatureSpec& spec) {
  return FeatureExtractor(road, amenities, spec).extract(node_ids);
}

ScalerBounds fit_scaler(const FeatureMatrix& raw) {
  const auto rows = raw.values.rows();
  const auto cols = raw.values.cols();
  if (rows < 1) throw Error(ErrorKind::DimensionMismatch, "cannot fit scaler on zero rows");
  ScalerBounds b;
  b.min.resize(static_cast<std::size_t>(cols));
  b.max.resize(static_cast<std::size_t>(cols));
  b.constant.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto col = raw.values.col(j);
    const auto k = static_cast<std::size_t>(j);
    b.min[k] = col.minCoeff();
    b.max[k] = col.maxCoeff();
    b.constant[k] = b.min[k] == b.max[k];
  }
  return b;
}

void apply_scaler_inplace(nn::Tensor2& values, const ScalerBounds& bounds) {
  if (static_cast<std::size_t>(values.cols()) != bounds.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "scaler fitted on " + std::to_string(bounds.size()) + " features, got " +
                    std::to_string(values.cols()));
  }
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      double& x = values(i, j);
      if (bounds.constant[k]) {
        x = 0.0;
      } else {
        x = std::clamp((x - bounds.min[k]) / (bounds.max[k] - bounds.min[k]), 0.0, 1.0);
      }
    }
  }
}

FeatureMatrix apply_scaler(const FeatureMatrix& raw, const ScalerBounds& bounds) {
  FeatureMatrix out = raw;
  apply_scaler_inplace(out.values, bounds);
  return out;
}

void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  CsvTable t;
  t.header.push_back("road_node_id");
  for (Feature f : m.features) t.header.emplace_back(feature_name(f));
  for (std::size_t i = 0; i < m.node_ids.size(); ++i) {
    std::vector<std::string> row{std::to_string(m.node_ids[i])};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      row.push_back(format_double(m.values(static_cast<Eigen::Index>(i), j)));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

}  // namespace geoctx
