#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "geoctx/road_graph.hpp"

namespace geoctx {

struct BoundingBox {
  double min_lon = -180.0;
  double min_lat = -90.0;
  double max_lon = 180.0;
  double max_lat = 90.0;

  bool contains(double lon, double lat) const {
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
  }
};

struct OsmExtract {
  RoadGraph road;
  std::vector<AmenityPoint> amenities;  // ascending id
};

inline constexpr double kKmPerMile = 1.609344;

// Parses an OSM XML document. Only ways tagged `highway` become road edges,
// one per consecutive node pair; `oneway=yes` yields a single directed edge,
// anything else an antiparallel pair. With a bbox, nodes outside are dropped
// and a way survives only if at least one of its nodes lies inside.
// Throws MalformedXml or DanglingNodeRef.
OsmExtract parse_osm_xml(std::string_view xml, std::optional<BoundingBox> bbox = std::nullopt);
OsmExtract parse_osm_file(const std::filesystem::path& path,
                          std::optional<BoundingBox> bbox = std::nullopt);

// Tag value parsing. Unparseable values are absent rather than errors.
// "50" -> 50, "30 mph" -> 48.28032, "50;70" -> 70, "signals" -> nullopt.
std::optional<double> parse_maxspeed(std::string_view value);
// "2" -> 2, "2;3" -> 3, "0" / "two" -> nullopt.
std::optional<int> parse_lanes(std::string_view value);

}  // namespace geoctx
