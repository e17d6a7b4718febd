#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "geoctx/road_graph.hpp"
#include "geoctx/sensors.hpp"
#include "geoctx/synthetic_city.hpp"

namespace geoctx {

// On-disk dataset directory:
//   nodes.csv, edges.csv     road graph
//   amenities.csv            optional amenity points
//   sensors.csv              sensor locations
//   speeds.csv               optional wide speed table
//   archetypes.csv           optional, synthetic cities only
struct Dataset {
  RoadGraph road;
  std::vector<AmenityPoint> amenities;
  SensorSet sensors;
  std::optional<SpeedSeries> speeds;
  std::optional<std::vector<Archetype>> archetypes;
};

Dataset load_dataset(const std::filesystem::path& dir, bool need_speeds = false);
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset dataset_from_city(SyntheticCity city);

}  // namespace geoctx
