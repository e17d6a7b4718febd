#include "geoctx/dataset.hpp"

#include "geoctx/error.hpp"
#include "geoctx/road_csv.hpp"

namespace geoctx {

Dataset load_dataset(const std::filesystem::path& dir, bool need_speeds) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::IoFailure, "dataset directory " + dir.string() + " does not exist");
  }
  Dataset d;
  d.road = load_road_csv(dir / "nodes.csv", dir / "edges.csv");
  if (std::filesystem::exists(dir / "amenities.csv")) d.amenities = load_amenities_csv(dir / "amenities.csv");
  d.sensors = load_sensors(dir / "sensors.csv");
  if (need_speeds || std::filesystem::exists(dir / "speeds.csv")) {
    d.speeds = load_speeds(dir / "speeds.csv", d.sensors);
  }
  if (std::filesystem::exists(dir / "archetypes.csv")) {
    d.archetypes = load_archetypes(dir / "archetypes.csv", d.sensors);
  }
  return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_road_csv(data.road, dir / "nodes.csv", dir / "edges.csv");
  write_amenities_csv(data.amenities, dir / "amenities.csv");
  write_sensors(data.sensors, dir / "sensors.csv");
  if (data.speeds) write_speeds(*data.speeds, data.sensors, dir / "speeds.csv");
  if (data.archetypes) write_archetypes(*data.archetypes, data.sensors, dir / "archetypes.csv");
}

Dataset dataset_from_city(SyntheticCity city) {
  Dataset d;
  d.road = std::move(city.road);
  d.amenities = std::move(city.amenities);
  d.sensors = std::move(city.sensors);
  d.speeds = std::move(city.speeds);
  d.archetypes = std::move(city.archetype);
  return d;
}

}  // namespace geoctx
