#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace geoctx {

struct RoadNode {
  std::int64_t id = 0;
  double lon = 0.0;  // x
  double lat = 0.0;  // y

  friend bool operator==(const RoadNode&, const RoadNode&) = default;
};

struct RoadEdge {
  std::int64_t u = 0;
  std::int64_t v = 0;
  std::optional<double> maxspeed;  // km/h
  std::optional<int> lanes;
  std::optional<double> length;  // meters
  bool oneway = false;
  std::string highway;
  std::string name;  // empty when absent

  friend bool operator==(const RoadEdge&, const RoadEdge&) = default;
};

// Total order used for canonical edge ordering: (u, v) first, then the
// attributes so that parallel edges also sort deterministically.
bool edge_less(const RoadEdge& a, const RoadEdge& b);

struct RoadGraph {
  std::vector<RoadNode> nodes;  // ascending id after canonicalize()
  std::vector<RoadEdge> edges;  // edge_less order after canonicalize()
  bool directed = true;

  // Sorts nodes and edges; throws DanglingNodeRef on duplicate ids or edges
  // that reference a missing node.
  void canonicalize();
  void validate() const;

  // Position of a node id in `nodes`; requires canonical order.
  std::optional<std::size_t> position(std::int64_t id) const;

  friend bool operator==(const RoadGraph&, const RoadGraph&) = default;
};

struct AmenityPoint {
  std::int64_t id = 0;
  double lon = 0.0;
  double lat = 0.0;
  std::string amenity_kind;

  friend bool operator==(const AmenityPoint&, const AmenityPoint&) = default;
};

// Incidence lookup over a canonical RoadGraph. Each edge is listed for both
// of its endpoints (u/v node-edge pairing).
class RoadIndex {
 public:
  explicit RoadIndex(const RoadGraph& graph);

  const RoadGraph& graph() const { return *graph_; }
  std::optional<std::size_t> position(std::int64_t id) const;
  const std::vector<std::size_t>& incident_edges(std::size_t node_pos) const {
    return incident_[node_pos];
  }

 private:
  const RoadGraph* graph_;
  std::unordered_map<std::int64_t, std::size_t> pos_;
  std::vector<std::vector<std::size_t>> incident_;
};

}  // namespace geoctx
