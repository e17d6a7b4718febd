#pragma once

#include <filesystem>
#include <vector>

#include "geoctx/road_graph.hpp"

namespace geoctx {

// nodes: `id,lon,lat`; edges: `u,v,maxspeed,lanes,length,oneway,highway,name`
// with empty cells for absent values. Output is sorted and byte-deterministic;
// write -> load -> write reproduces the same bytes.
RoadGraph load_road_csv(const std::filesystem::path& nodes_csv,
                        const std::filesystem::path& edges_csv);
void write_road_csv(const RoadGraph& graph, const std::filesystem::path& nodes_csv,
                    const std::filesystem::path& edges_csv);

// In-memory variants used by the file functions.
RoadGraph parse_road_csv(std::string_view nodes_text, std::string_view edges_text);
std::string format_nodes_csv(const RoadGraph& graph);
std::string format_edges_csv(const RoadGraph& graph);

// amenities: `id,lon,lat,amenity`
std::vector<AmenityPoint> load_amenities_csv(const std::filesystem::path& path);
void write_amenities_csv(const std::vector<AmenityPoint>& amenities,
                         const std::filesystem::path& path);

}  // namespace geoctx
