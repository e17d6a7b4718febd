#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "geoctx/geo.hpp"
#include "geoctx/road_graph.hpp"
#include "geoctx/sensors.hpp"

namespace geoctx::testing {

// Road graph plus sensors on a coarse 0.001-degree lattice, so exact distance
// ties are common and the tie-breaking rules get exercised.
struct RandomInstance {
  RoadGraph road;
  SensorSet sensors;
  double epsilon = 0.0;  // never equal to a lattice distance
  bool directed = false;
};

RandomInstance random_instance(std::uint64_t seed, std::size_t max_nodes = 50,
                               std::size_t max_sensors = 10);

// Brute-force clustering written directly from the matching rules, without
// the spatial index.
struct OracleClusters {
  std::vector<std::size_t> root_of;
  std::vector<std::int32_t> cluster_of;  // -1 when pruned
};

OracleClusters oracle_match(const RoadGraph& road, const SensorSet& sensors);
OracleClusters oracle_prune(const OracleClusters& c, const RoadGraph& road,
                            const SensorSet& sensors, double epsilon);

struct OracleQuotient {
  std::vector<std::uint8_t> adjacency;
  std::vector<std::uint32_t> multiplicity;
};

// Endpoint enumeration over every road edge.
OracleQuotient oracle_quotient(const RoadGraph& road, const OracleClusters& c, std::size_t n,
                               bool directed);

}  // namespace geoctx::testing
