#include "geoctx/road_graph.hpp"

#include <algorithm>
#include <tuple>

#include "geoctx/error.hpp"

namespace geoctx {

bool edge_less(const RoadEdge& a, const RoadEdge& b) {
  return std::tie(a.u, a.v, a.highway, a.name, a.maxspeed, a.lanes, a.length, a.oneway) <
         std::tie(b.u, b.v, b.highway, b.name, b.maxspeed, b.lanes, b.length, b.oneway);
}

void RoadGraph::canonicalize() {
  std::sort(nodes.begin(), nodes.end(),
            [](const RoadNode& a, const RoadNode& b) { return a.id < b.id; });
  std::sort(edges.begin(), edges.end(), edge_less);
  validate();
}

std::optional<std::size_t> RoadGraph::position(std::int64_t id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const RoadNode& n, std::int64_t key) { return n.id < key; });
  if (it == nodes.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

void RoadGraph::validate() const {
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].id == nodes[i - 1].id) {
      throw Error(ErrorKind::DanglingNodeRef,
                  "duplicate road node id " + std::to_string(nodes[i].id));
    }
  }
  for (const auto& e : edges) {
    for (std::int64_t id : {e.u, e.v}) {
      if (!position(id)) {
        throw Error(ErrorKind::DanglingNodeRef,
                    "edge references unknown node id " + std::to_string(id));
      }
    }
  }
}

RoadIndex::RoadIndex(const RoadGraph& graph) : graph_(&graph), incident_(graph.nodes.size()) {
  pos_.reserve(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) pos_.emplace(graph.nodes[i].id, i);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    auto pu = pos_.find(edge.u);
    auto pv = pos_.find(edge.v);
    if (pu == pos_.end() || pv == pos_.end()) {
      throw Error(ErrorKind::DanglingNodeRef,
                  "edge references unknown node id " +
                      std::to_string(pu == pos_.end() ? edge.u : edge.v));
    }
    incident_[pu->second].push_back(e);
    if (pv->second != pu->second) incident_[pv->second].push_back(e);
  }
}

std::optional<std::size_t> RoadIndex::position(std::int64_t id) const {
  auto it = pos_.find(id);
  if (it == pos_.end()) return std::nullopt;
  return it->second;
}

}  // namespace geoctx
