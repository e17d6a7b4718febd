#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "geoctx/geo.hpp"
#include "geoctx/road_graph.hpp"
#include "geoctx/sensors.hpp"
#include "geoctx/spatial_index.hpp"

namespace geoctx {

inline constexpr std::int32_t kUnassigned = -1;

// Sensor clusters over the road nodes. Sensors are addressed by their index in
// the SensorSet, road nodes by their position in the canonical RoadGraph.
struct ClusterAssignment {
  std::vector<std::size_t> root_of;                // sensor -> road node position
  std::vector<std::int32_t> cluster_of;            // road node position -> sensor, or kUnassigned
  std::vector<double> distance;                    // road node position -> distance to its sensor
  std::vector<std::vector<std::size_t>> members;   // sensor -> ascending road node positions

  std::size_t sensor_count() const { return root_of.size(); }
  bool is_root(std::size_t node_pos) const;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

// Roots: sensors in SensorSet order each claim their nearest unclaimed road
// node (ties towards the lower node id). Every road node then joins the
// cluster of its nearest root (ties towards the earlier sensor); roots always
// belong to their own sensor. Throws NotEnoughRoadNodes when |R_V| < |T_V|.
ClusterAssignment match_sensors(const RoadGraph& road, const SensorSet& sensors,
                                DistanceMetric metric = DistanceMetric::Euclidean);

struct QuotientGraph {
  SensorSet sensors;
  ClusterAssignment clusters;
  bool directed = false;
  std::vector<std::uint8_t> adjacency;      // N x N, row-major, zero diagonal
  std::vector<std::uint32_t> multiplicity;  // witnessing road edges per entry
  std::vector<std::vector<std::size_t>> neighbors;  // ascending sensor indices
  std::vector<Point2> root_position;        // lon/lat of each root road node

  std::size_t size() const { return sensors.size(); }
  bool has_edge(std::size_t a, std::size_t b) const { return adjacency[a * size() + b] != 0; }
  std::size_t edge_count() const;  // undirected graphs count each pair once
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
  std::vector<std::size_t> isolated_nodes() const;
};

// Cross-cluster road edges become quotient edges; intra-cluster edges and
// edges touching unassigned road nodes are dropped.
QuotientGraph build_quotient(const RoadGraph& road, const SensorSet& sensors,
                             ClusterAssignment clusters, bool directed = false);

// Removes road nodes at distance >= epsilon from their cluster's sensor (roots
// are kept) and recomputes adjacency over the survivors.
QuotientGraph prune_clusters(const QuotientGraph& q, const RoadGraph& road,
                             const SensorSet& sensors, double epsilon,
                             DistanceMetric metric = DistanceMetric::Euclidean);

// `u_sensor_id,v_sensor_id`
void write_quotient_edges_csv(const QuotientGraph& q, const std::filesystem::path& path);
// `road_node_id,sensor_id,dist_deg,is_root`, pruned nodes omitted.
void write_clusters_csv(const QuotientGraph& q, const RoadGraph& road,
                        const std::filesystem::path& path);

}  // namespace geoctx
