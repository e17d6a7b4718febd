#include "geoctx/quotient.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/spatial_index.hpp"

namespace geoctx {

bool ClusterAssignment::is_root(std::size_t node_pos) const {
  const auto c = cluster_of[node_pos];
  return c != kUnassigned && root_of[static_cast<std::size_t>(c)] == node_pos;
}

namespace {

std::vector<Point2> road_points(const RoadGraph& road) {
  std::vector<Point2> pts;
  pts.reserve(road.nodes.size());
  for (const auto& n : road.nodes) pts.push_back({n.lon, n.lat});
  return pts;
}

// Linear scan fallback used for the haversine metric, where the planar
// k-d tree bound does not apply. Ties go to the smaller index.
template <class Accept>
std::optional<std::size_t> scan_nearest(const std::vector<Point2>& pts, Point2 q,
                                        DistanceMetric metric, Accept&& accept) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!accept(i)) continue;
    const double d = distance_deg(metric, q.x, q.y, pts[i].x, pts[i].y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

ClusterAssignment match_sensors(const RoadGraph& road, const SensorSet& sensors,
                                DistanceMetric metric) {
  const std::size_t n_road = road.nodes.size();
  const std::size_t n_sensors = sensors.size();
  if (n_road < n_sensors || n_road == 0) {
    throw Error(ErrorKind::NotEnoughRoadNodes, std::to_string(n_road) + " road nodes for " +
                                                   std::to_string(n_sensors) + " sensors");
  }
  const std::vector<Point2> pts = road_points(road);
  const bool planar = metric == DistanceMetric::Euclidean;
  KdTree2 road_tree;
  if (planar) road_tree = KdTree2(pts);

  ClusterAssignment out;
  out.root_of.resize(n_sensors);
  std::vector<bool> claimed(n_road, false);
  for (std::size_t s = 0; s < n_sensors; ++s) {
    const Point2 q{sensors[s].lon, sensors[s].lat};
    auto unclaimed = [&claimed](std::size_t i) { return !claimed[i]; };
    auto hit = planar ? road_tree.nearest_if(q, unclaimed) : scan_nearest(pts, q, metric, unclaimed);
    claimed[*hit] = true;
    out.root_of[s] = *hit;
  }

  std::vector<Point2> root_pts;
  root_pts.reserve(n_sensors);
  for (std::size_t s = 0; s < n_sensors; ++s) root_pts.push_back(pts[out.root_of[s]]);
  KdTree2 root_tree;
  if (planar) root_tree = KdTree2(root_pts);

  out.cluster_of.assign(n_road, kUnassigned);
  out.distance.assign(n_road, 0.0);
  out.members.assign(n_sensors, {});
  for (std::size_t s = 0; s < n_sensors; ++s) {
    out.cluster_of[out.root_of[s]] = static_cast<std::int32_t>(s);
  }
  auto any = [](std::size_t) { return true; };
  for (std::size_t i = 0; i < n_road; ++i) {
    if (out.cluster_of[i] == kUnassigned && n_sensors > 0) {
      const auto s = planar ? root_tree.nearest(pts[i]) : scan_nearest(root_pts, pts[i], metric, any);
      out.cluster_of[i] = static_cast<std::int32_t>(*s);
    }
    if (out.cluster_of[i] != kUnassigned) {
      const auto s = static_cast<std::size_t>(out.cluster_of[i]);
      out.members[s].push_back(i);
      out.distance[i] = distance_deg(metric, sensors[s].lon, sensors[s].lat, pts[i].x, pts[i].y);
    }
  }
  return out;
}

QuotientGraph build_quotient(const RoadGraph& road, const SensorSet& sensors,
                             ClusterAssignment clusters, bool directed) {
  const std::size_t n = sensors.size();
  if (clusters.root_of.size() != n || clusters.cluster_of.size() != road.nodes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cluster assignment does not match graph/sensors");
  }
  const RoadIndex index(road);
  QuotientGraph q;
  q.sensors = sensors;
  q.directed = directed;
  q.adjacency.assign(n * n, 0);
  q.multiplicity.assign(n * n, 0);
  for (const auto& e : road.edges) {
    const auto cu = clusters.cluster_of[*index.position(e.u)];
    const auto cv = clusters.cluster_of[*index.position(e.v)];
    if (cu == kUnassigned || cv == kUnassigned || cu == cv) continue;
    const auto a = static_cast<std::size_t>(cu);
    const auto b = static_cast<std::size_t>(cv);
    q.adjacency[a * n + b] = 1;
    ++q.multiplicity[a * n + b];
    if (!directed) {
      q.adjacency[b * n + a] = 1;
      ++q.multiplicity[b * n + a];
    }
  }
  q.neighbors.assign(n, {});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (q.adjacency[a * n + b]) q.neighbors[a].push_back(b);
    }
  }
  q.root_position.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& node = road.nodes[clusters.root_of[s]];
    q.root_position.push_back({node.lon, node.lat});
  }
  q.clusters = std::move(clusters);
  return q;
}

QuotientGraph prune_clusters(const QuotientGraph& q, const RoadGraph& road,
                             const SensorSet& sensors, double epsilon, DistanceMetric metric) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::ParameterOutOfRange, "epsilon must be > 0");
  }
  ClusterAssignment pruned = q.clusters;
  for (std::size_t s = 0; s < pruned.members.size(); ++s) {
    std::vector<std::size_t> kept;
    kept.reserve(pruned.members[s].size());
    for (std::size_t pos : pruned.members[s]) {
      const auto& node = road.nodes[pos];
      const double d = distance_deg(metric, sensors[s].lon, sensors[s].lat, node.lon, node.lat);
      if (pos == pruned.root_of[s] || d < epsilon) {
        kept.push_back(pos);
      } else {
        pruned.cluster_of[pos] = kUnassigned;
      }
    }
    pruned.members[s] = std::move(kept);
  }
  return build_quotient(road, sensors, std::move(pruned), q.directed);
}

std::size_t QuotientGraph::edge_count() const {
  std::size_t count = 0;
  const std::size_t n = size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = directed ? 0 : a + 1; b < n; ++b) count += adjacency[a * n + b];
  }
  return count;
}

std::vector<std::pair<std::size_t, std::size_t>> QuotientGraph::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = directed ? 0 : a + 1; b < n; ++b) {
      if (adjacency[a * n + b]) out.emplace_back(a, b);
    }
  }
  return out;
}

std::vector<std::size_t> QuotientGraph::isolated_nodes() const {
  std::vector<std::size_t> out;
  const std::size_t n = size();
  for (std::size_t a = 0; a < n; ++a) {
    bool any = false;
    for (std::size_t b = 0; b < n && !any; ++b) any = adjacency[a * n + b] || adjacency[b * n + a];
    if (!any) out.push_back(a);
  }
  return out;
}

void write_quotient_edges_csv(const QuotientGraph& q, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"u_sensor_id", "v_sensor_id"};
  for (auto [a, b] : q.edge_list()) t.rows.push_back({q.sensors[a].id, q.sensors[b].id});
  write_csv(path, t);
}

void write_clusters_csv(const QuotientGraph& q, const RoadGraph& road,
                        const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"road_node_id", "sensor_id", "dist_deg", "is_root"};
  const auto& c = q.clusters;
  for (std::size_t pos = 0; pos < c.cluster_of.size(); ++pos) {
    if (c.cluster_of[pos] == kUnassigned) continue;
    const auto s = static_cast<std::size_t>(c.cluster_of[pos]);
    t.rows.push_back({std::to_string(road.nodes[pos].id), q.sensors[s].id,
                      format_double(c.distance[pos]), c.is_root(pos) ? "true" : "false"});
  }
  write_csv(path, t);
}

}  // namespace geoctx
