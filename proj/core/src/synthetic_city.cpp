#include "geoctx/synthetic_city.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/geo.hpp"
#include "geoctx/sampler.hpp"

namespace geoctx {

std::string_view archetype_name(Archetype a) { return a == Archetype::Dense ? "dense" : "sparse"; }

void CityParams::validate() const {
  if (n_sensors < 4) throw Error(ErrorKind::ParameterOutOfRange, "need at least 4 sensors");
  if (n_road_nodes != 0 && n_road_nodes < 3 * n_sensors) {
    throw Error(ErrorKind::ParameterOutOfRange,
                "n_road_nodes must be >= 3 * n_sensors (" + std::to_string(3 * n_sensors) + ")");
  }
  if (!(dense_fraction > 0.0 && dense_fraction < 1.0)) {
    throw Error(ErrorKind::ParameterOutOfRange, "dense_fraction must be in (0, 1)");
  }
  if (step_seconds <= 0) throw Error(ErrorKind::ParameterOutOfRange, "step must be positive");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
    throw Error(ErrorKind::ParameterOutOfRange, "missing_rate must be in [0, 1)");
  }
}

namespace {

constexpr double kOriginLon = -118.25;
constexpr double kOriginLat = 34.05;
constexpr double kBlock = 0.01;

struct Builder {
  SyntheticCity city;
  std::mt19937_64 rng;
  std::int64_t next_node = 1;
  std::int64_t next_amenity = 1;

  explicit Builder(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int pick(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

  std::int64_t node(double lon, double lat) {
    city.road.nodes.push_back({next_node, lon, lat});
    return next_node++;
  }

  void road(std::int64_t u, std::int64_t v, double maxspeed, int lanes, const char* highway) {
    const auto& a = city.road.nodes[static_cast<std::size_t>(u - 1)];
    const auto& b = city.road.nodes[static_cast<std::size_t>(v - 1)];
    const double len = haversine_meters(a.lon, a.lat, b.lon, b.lat);
    for (int dir = 0; dir < 2; ++dir) {
      RoadEdge e;
      e.u = dir ? v : u;
      e.v = dir ? u : v;
      e.maxspeed = maxspeed;
      e.lanes = lanes;
      e.length = len;
      e.highway = highway;
      city.road.edges.push_back(std::move(e));
    }
  }

  void amenity(double lon, double lat) {
    static constexpr const char* kinds[] = {"cafe", "restaurant", "school", "bank", "pharmacy"};
    city.amenities.push_back({next_amenity++, lon, lat, kinds[pick(0, 4)]});
  }
};

// Fraction of free-flow speed lost at a given hour for a dense sensor.
double rush_dip(double hour, double depth) {
  auto bump = [](double h, double centre, double width) {
    const double d = (h - centre) / width;
    return std::exp(-0.5 * d * d);
  };
  return depth * (bump(hour, 8.0, 1.2) + 0.8 * bump(hour, 17.5, 1.5));
}

}  // namespace

SyntheticCity generate_city(const CityParams& p) {
  p.validate();
  const std::size_t total_nodes = p.n_road_nodes ? p.n_road_nodes : 5 * p.n_sensors;
  Builder b(split_seed(p.seed, 0));
  const std::size_t connected = p.n_sensors - 1;
  const auto n_dense = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(p.dense_fraction * static_cast<double>(connected))), 2,
      connected - 2);
  const std::size_t n_sparse = connected - n_dense;

  // Road nodes per sensor, root included.
  std::vector<std::size_t> budget(p.n_sensors, total_nodes / p.n_sensors);
  for (std::size_t i = 0; i < total_nodes % p.n_sensors; ++i) ++budget[i];

  std::vector<Sensor> sensors;
  std::vector<std::int64_t> root(p.n_sensors);
  std::vector<double> speed_limit(p.n_sensors);
  std::vector<double> amenity_level(p.n_sensors, 0.0);
  auto sensor_id = [](std::size_t i) {
    std::string s = std::to_string(i + 1);
    return "s" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
  };

  // Dense lattice core.
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_dense))));
  for (std::size_t i = 0; i < n_dense; ++i) {
    const double lon = kOriginLon + static_cast<double>(i % cols) * kBlock;
    const double lat = kOriginLat + static_cast<double>(i / cols) * kBlock;
    b.city.archetype.push_back(Archetype::Dense);
    sensors.push_back({sensor_id(i), lon, lat});
    root[i] = b.node(lon + b.uniform(-5e-4, 5e-4), lat + b.uniform(-5e-4, 5e-4));
    speed_limit[i] = 10.0 * b.pick(4, 6);
    const int lanes = b.pick(1, 2);
    for (std::size_t k = 1; k < budget[i]; ++k) {
      const double ang = b.uniform(0.0, 2.0 * std::numbers::pi);
      const double r = b.uniform(0.0015, 0.0045);
      const auto v = b.node(lon + r * std::cos(ang), lat + r * std::sin(ang));
      b.road(root[i], v, speed_limit[i] - 10.0 * b.pick(0, 1), lanes, "residential");
    }
    const int n_amen = b.pick(4, 9);
    amenity_level[i] = n_amen;
    for (int a = 0; a < n_amen; ++a) b.amenity(lon + b.uniform(-0.003, 0.003), lat + b.uniform(-0.003, 0.003));
  }
  for (std::size_t i = 0; i < n_dense; ++i) {
    if ((i % cols) + 1 < cols && i + 1 < n_dense) {
      b.road(root[i], root[i + 1], std::min(speed_limit[i], speed_limit[i + 1]), 2, "tertiary");
    }
    if (i + cols < n_dense) {
      b.road(root[i], root[i + cols], std::min(speed_limit[i], speed_limit[i + cols]), 2, "tertiary");
    }
  }

  // Suburban ring around the core.
  const double core_extent = static_cast<double>(cols) * kBlock;
  const double centre_lon = kOriginLon + 0.5 * (static_cast<double>(cols) - 1.0) * kBlock;
  const double centre_lat = kOriginLat + 0.5 * (static_cast<double>((n_dense + cols - 1) / cols) - 1.0) * kBlock;
  const double radius = std::max(core_extent + 0.06,
                                 0.05 * static_cast<double>(n_sparse) / (2.0 * std::numbers::pi));
  for (std::size_t j = 0; j < n_sparse; ++j) {
    const std::size_t i = n_dense + j;
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_sparse);
    const double lon = centre_lon + radius * std::cos(ang);
    const double lat = centre_lat + radius * std::sin(ang);
    b.city.archetype.push_back(Archetype::Sparse);
    sensors.push_back({sensor_id(i), lon, lat});
    root[i] = b.node(lon + b.uniform(-5e-4, 5e-4), lat + b.uniform(-5e-4, 5e-4));
    speed_limit[i] = 10.0 * b.pick(8, 11);
    const int lanes = b.pick(2, 4);
    for (std::size_t k = 1; k < budget[i]; ++k) {
      // Every other extra node is a long spur beyond the default pruning radius.
      const bool spur = k % 2 == 0;
      const double a2 = b.uniform(0.0, 2.0 * std::numbers::pi);
      const double r = spur ? b.uniform(0.012, 0.02) : b.uniform(0.002, 0.006);
      const auto v = b.node(lon + r * std::cos(a2), lat + r * std::sin(a2));
      b.road(root[i], v, spur ? 50.0 : speed_limit[i], spur ? 1 : lanes, spur ? "unclassified" : "primary");
    }
    if (b.uniform(0.0, 1.0) < 0.2) {
      b.amenity(lon + b.uniform(-0.004, 0.004), lat + b.uniform(-0.004, 0.004));
      amenity_level[i] = 1;
    }
  }
  for (std::size_t j = 0; j < n_sparse; ++j) {
    const std::size_t i = n_dense + j;
    const std::size_t k = n_dense + (j + 1) % n_sparse;
    if (n_sparse > 2 || j == 0) b.road(root[i], root[k], std::min(speed_limit[i], speed_limit[k]), 3, "trunk");
  }
  // Arterials from the ring to the nearest core corner.
  for (std::size_t j = 0; j < n_sparse; j += std::max<std::size_t>(1, n_sparse / 4)) {
    const std::size_t i = n_dense + j;
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < n_dense; ++c) {
      const double d = std::hypot(sensors[c].lon - sensors[i].lon, sensors[c].lat - sensors[i].lat);
      if (d < best_d) best_d = d, best = c;
    }
    b.road(root[i], root[best], 70.0, 2, "secondary");
  }

  // One sensor on a road fragment with no connection to the rest.
  {
    const std::size_t i = p.n_sensors - 1;
    const double lon = centre_lon + radius + 0.25;
    const double lat = centre_lat - 0.1;
    b.city.archetype.push_back(Archetype::Sparse);
    sensors.push_back({sensor_id(i), lon, lat});
    root[i] = b.node(lon + 2e-4, lat - 2e-4);
    speed_limit[i] = 90.0;
    for (std::size_t k = 1; k < budget[i]; ++k) {
      const auto v = b.node(lon + 0.002 * static_cast<double>(k), lat + 0.001 * static_cast<double>(k));
      b.road(root[i], v, speed_limit[i], 2, "primary");
    }
    b.city.isolated_sensor = i;
  }

  b.city.road.canonicalize();
  std::sort(b.city.amenities.begin(), b.city.amenities.end(),
            [](const AmenityPoint& x, const AmenityPoint& y) { return x.id < y.id; });
  b.city.sensors = SensorSet(sensors);

  // Speeds: free flow from the local limit, rush-hour dips scaled by amenity
  // density for dense sensors, AR(1) noise everywhere.
  std::mt19937_64 noise_rng(split_seed(p.seed, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t steps_per_day = static_cast<std::size_t>(86400 / p.step_seconds);
  const std::size_t length = p.days * steps_per_day;
  SpeedSeries& s = b.city.speeds;
  s.n_sensors = p.n_sensors;
  s.timestamps.resize(length);
  s.values.assign(length * p.n_sensors, 0.0);
  for (std::size_t t = 0; t < length; ++t) s.timestamps[t] = p.start + static_cast<std::int64_t>(t) * p.step_seconds;
  for (std::size_t i = 0; i < p.n_sensors; ++i) {
    const bool dense = b.city.archetype[i] == Archetype::Dense;
    const double free_flow = speed_limit[i] * (dense ? 0.85 : 0.95);
    const double depth = dense ? 0.12 + 0.04 * amenity_level[i] : 0.0;
    const double sigma = dense ? 1.6 : 1.2;
    double noise = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
      noise = 0.92 * noise + sigma * gauss(noise_rng);
      const double hour = static_cast<double>((t % steps_per_day) * static_cast<std::size_t>(p.step_seconds)) / 3600.0;
      double v = free_flow * (1.0 - rush_dip(hour, depth)) +
                 (dense ? 0.0 : 0.02 * free_flow * std::sin(2.0 * std::numbers::pi * hour / 24.0)) + noise;
      v = std::max(v, 0.0);
      if (coin(noise_rng) < p.missing_rate) v = kMissing;
      s.values[t * p.n_sensors + i] = v;
    }
  }
  return std::move(b.city);
}

void write_archetypes(const std::vector<Archetype>& archetypes, const SensorSet& sensors,
                      const std::filesystem::path& path) {
  if (archetypes.size() != sensors.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one archetype per sensor expected");
  }
  CsvTable t;
  t.header = {"sensor_id", "archetype"};
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    t.rows.push_back({sensors[i].id, std::string(archetype_name(archetypes[i]))});
  }
  write_csv(path, t);
}

std::vector<Archetype> load_archetypes(const std::filesystem::path& path, const SensorSet& sensors) {
  const CsvTable t = read_csv(path);
  t.require_header({"sensor_id", "archetype"}, path.string());
  std::vector<Archetype> out(sensors.size(), Archetype::Sparse);
  for (const auto& row : t.rows) {
    const auto idx = sensors.index_of(row[0]);
    if (!idx) throw Error(ErrorKind::UnknownSensorColumn, "archetype for unknown sensor " + row[0]);
    out[*idx] = row[1] == "dense" ? Archetype::Dense : Archetype::Sparse;
  }
  return out;
}

}  // namespace geoctx
