#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "geoctx/road_graph.hpp"
#include "geoctx/sensors.hpp"

namespace geoctx {

enum class Archetype { Dense, Sparse };

std::string_view archetype_name(Archetype a);

struct CityParams {
  std::uint64_t seed = 1;
  std::size_t n_sensors = 60;
  std::size_t n_road_nodes = 0;  // 0: 5 per sensor
  std::size_t days = 7;
  double dense_fraction = 0.5;  // of the connected sensors
  std::int64_t start = 1330560000;  // 2012-03-01T00:00:00Z
  std::int64_t step_seconds = 300;
  double missing_rate = 0.001;

  void validate() const;  // ParameterOutOfRange

  friend bool operator==(const CityParams&, const CityParams&) = default;
};

// A lattice of dense, amenity-rich blocks with rush-hour dips, surrounded by
// a ring of fast suburban sensors with flat profiles and long radial spurs,
// plus one sensor on a disconnected road fragment. Each sensor's free-flow
// speed follows the speed limit of its own roads.
struct SyntheticCity {
  RoadGraph road;
  std::vector<AmenityPoint> amenities;
  SensorSet sensors;
  SpeedSeries speeds;
  std::vector<Archetype> archetype;  // per sensor
  std::size_t isolated_sensor = 0;
};

SyntheticCity generate_city(const CityParams& params);

// `sensor_id,archetype`
void write_archetypes(const std::vector<Archetype>& archetypes, const SensorSet& sensors,
                      const std::filesystem::path& path);
std::vector<Archetype> load_archetypes(const std::filesystem::path& path, const SensorSet& sensors);

}  // namespace geoctx
