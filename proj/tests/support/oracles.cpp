#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace geoctx::testing {

RandomInstance random_instance(std::uint64_t seed, std::size_t max_nodes, std::size_t max_sensors) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  RandomInstance inst;
  const std::size_t n_sensors = uniform(1, max_sensors);
  const std::size_t n_nodes = uniform(std::max<std::size_t>(n_sensors, 2), max_nodes);
  const int grid = static_cast<int>(uniform(6, 20));
  auto coord = [&](int origin) {
    return (origin + std::uniform_int_distribution<int>(0, grid)(rng)) * 0.001;
  };

  std::vector<std::int64_t> ids(n_nodes);
  std::iota(ids.begin(), ids.end(), 1000);
  std::shuffle(ids.begin(), ids.end(), rng);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    inst.road.nodes.push_back(RoadNode{ids[i], coord(-118000), coord(34000)});
  }
  const std::size_t n_edges = uniform(0, 2 * n_nodes);
  for (std::size_t k = 0; k < n_edges; ++k) {
    RoadEdge e;
    e.u = ids[uniform(0, n_nodes - 1)];
    e.v = ids[uniform(0, n_nodes - 1)];
    if (e.u == e.v) continue;
    e.highway = "residential";
    e.oneway = uniform(0, 3) == 0;
    inst.road.edges.push_back(e);
    if (!e.oneway) inst.road.edges.push_back(RoadEdge{e.v, e.u, {}, {}, {}, false, "residential", ""});
  }
  inst.road.canonicalize();

  std::vector<Sensor> sensors;
  for (std::size_t s = 0; s < n_sensors; ++s) {
    sensors.push_back(Sensor{"t" + std::to_string(s), coord(-118000), coord(34000)});
  }
  inst.sensors = SensorSet(std::move(sensors));
  inst.epsilon = (static_cast<double>(uniform(0, 12)) + 0.5) * 0.001;
  inst.directed = uniform(0, 1) == 1;
  return inst;
}

namespace {

double sq(double a, double b, double c, double d) {
  return (a - c) * (a - c) + (b - d) * (b - d);
}

}  // namespace

OracleClusters oracle_match(const RoadGraph& road, const SensorSet& sensors) {
  const std::size_t n_road = road.nodes.size();
  OracleClusters c;
  c.cluster_of.assign(n_road, -1);
  std::vector<bool> claimed(n_road, false);
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    std::size_t best = n_road;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_road; ++i) {
      if (claimed[i]) continue;
      const double d = sq(road.nodes[i].lon, road.nodes[i].lat, sensors[s].lon, sensors[s].lat);
      if (d < best_d || (d == best_d && road.nodes[i].id < road.nodes[best].id)) {
        best = i;
        best_d = d;
      }
    }
    claimed[best] = true;
    c.root_of.push_back(best);
    c.cluster_of[best] = static_cast<std::int32_t>(s);
  }
  for (std::size_t i = 0; i < n_road; ++i) {
    if (claimed[i]) continue;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      const auto& r = road.nodes[c.root_of[s]];
      const double d = sq(road.nodes[i].lon, road.nodes[i].lat, r.lon, r.lat);
      if (d < best_d) {
        best_d = d;
        c.cluster_of[i] = static_cast<std::int32_t>(s);
      }
    }
  }
  return c;
}

OracleClusters oracle_prune(const OracleClusters& c, const RoadGraph& road,
                            const SensorSet& sensors, double epsilon) {
  OracleClusters out = c;
  for (std::size_t i = 0; i < road.nodes.size(); ++i) {
    const auto s = c.cluster_of[i];
    if (s < 0 || c.root_of[static_cast<std::size_t>(s)] == i) continue;
    const auto& sensor = sensors[static_cast<std::size_t>(s)];
    const double d = std::sqrt(sq(sensor.lon, sensor.lat, road.nodes[i].lon, road.nodes[i].lat));
    if (d >= epsilon) out.cluster_of[i] = -1;
  }
  return out;
}

OracleQuotient oracle_quotient(const RoadGraph& road, const OracleClusters& c, std::size_t n,
                               bool directed) {
  OracleQuotient q;
  q.adjacency.assign(n * n, 0);
  q.multiplicity.assign(n * n, 0);
  auto cluster = [&](std::int64_t id) {
    for (std::size_t i = 0; i < road.nodes.size(); ++i) {
      if (road.nodes[i].id == id) return c.cluster_of[i];
    }
    return std::int32_t{-1};
  };
  for (const auto& e : road.edges) {
    const auto a = cluster(e.u);
    const auto b = cluster(e.v);
    if (a < 0 || b < 0 || a == b) continue;
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    q.adjacency[ua * n + ub] = 1;
    ++q.multiplicity[ua * n + ub];
    if (!directed) {
      q.adjacency[ub * n + ua] = 1;
      ++q.multiplicity[ub * n + ua];
    }
  }
  return q;
}

}  // namespace geoctx::testing
