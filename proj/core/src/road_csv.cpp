#include "geoctx/road_csv.hpp"

#include <algorithm>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx {

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

bool parse_bool_cell(std::string_view cell, std::size_t row, std::string_view column) {
  if (cell == "true" || cell == "1") return true;
  if (cell == "false" || cell == "0" || cell.empty()) return false;
  throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(row) + ", column '" +
                                             std::string(column) + "': '" + std::string(cell) + "'");
}

void check_lon_lat(double lon, double lat, std::size_t row) {
  if (lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0) {
    throw Error(ErrorKind::BadNumericCell,
                "row " + std::to_string(row) + ": coordinates out of range");
  }
}

const std::string& cell_at(const std::vector<std::string>& row, std::size_t i) {
  static const std::string empty;
  return i < row.size() ? row[i] : empty;
}

}  // namespace

RoadGraph parse_road_csv(std::string_view nodes_text, std::string_view edges_text) {
  const CsvTable nodes = parse_csv(nodes_text);
  const CsvTable edges = parse_csv(edges_text);
  nodes.require_header({"id", "lon", "lat"}, "nodes csv");
  // A zero-byte edges file is accepted as "no edges".
  if (!edges.header.empty() || !edges.rows.empty()) edges.require_header({"u", "v", "maxspeed", "lanes", "length", "oneway", "highway", "name"},
                       "edges csv");

  RoadGraph g;
  g.nodes.reserve(nodes.rows.size());
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    const auto& row = nodes.rows[r];
    RoadNode n;
    n.id = parse_int_cell(cell_at(row, 0), r + 1, "id");
    n.lon = parse_double_cell(cell_at(row, 1), r + 1, "lon");
    n.lat = parse_double_cell(cell_at(row, 2), r + 1, "lat");
    check_lon_lat(n.lon, n.lat, r + 1);
    g.nodes.push_back(n);
  }
  g.edges.reserve(edges.rows.size());
  for (std::size_t r = 0; r < edges.rows.size(); ++r) {
    const auto& row = edges.rows[r];
    const std::size_t line = r + 1;
    RoadEdge e;
    e.u = parse_int_cell(cell_at(row, 0), line, "u");
    e.v = parse_int_cell(cell_at(row, 1), line, "v");
    e.maxspeed = parse_optional_double_cell(cell_at(row, 2), line, "maxspeed");
    if (e.maxspeed && !(*e.maxspeed > 0.0)) {
      throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(line) + ": maxspeed must be > 0");
    }
    if (!cell_at(row, 3).empty()) {
      const auto lanes = parse_int_cell(cell_at(row, 3), line, "lanes");
      if (lanes < 1) {
        throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(line) + ": lanes must be >= 1");
      }
      e.lanes = static_cast<int>(lanes);
    }
    e.length = parse_optional_double_cell(cell_at(row, 4), line, "length");
    e.oneway = parse_bool_cell(cell_at(row, 5), line, "oneway");
    e.highway = cell_at(row, 6);
    e.name = cell_at(row, 7);
    g.edges.push_back(std::move(e));
  }
  g.directed = true;
  g.canonicalize();
  return g;
}

RoadGraph load_road_csv(const std::filesystem::path& nodes_csv,
                        const std::filesystem::path& edges_csv) {
  return parse_road_csv(read_text_file(nodes_csv), read_text_file(edges_csv));
}

std::string format_nodes_csv(const RoadGraph& graph) {
  std::vector<const RoadNode*> sorted;
  sorted.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) sorted.push_back(&n);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RoadNode* a, const RoadNode* b) { return a->id < b->id; });
  CsvTable t;
  t.header = {"id", "lon", "lat"};
  t.rows.reserve(sorted.size());
  for (const auto* n : sorted) {
    t.rows.push_back({std::to_string(n->id), format_double(n->lon), format_double(n->lat)});
  }
  return format_csv(t);
}

std::string format_edges_csv(const RoadGraph& graph) {
  std::vector<const RoadEdge*> sorted;
  sorted.reserve(graph.edges.size());
  for (const auto& e : graph.edges) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RoadEdge* a, const RoadEdge* b) { return edge_less(*a, *b); });
  CsvTable t;
  t.header = {"u", "v", "maxspeed", "lanes", "length", "oneway", "highway", "name"};
  t.rows.reserve(sorted.size());
  for (const auto* e : sorted) {
    t.rows.push_back({std::to_string(e->u), std::to_string(e->v), opt_cell(e->maxspeed),
                      e->lanes ? std::to_string(*e->lanes) : std::string(), opt_cell(e->length),
                      e->oneway ? "true" : "false", e->highway, e->name});
  }
  return format_csv(t);
}

void write_road_csv(const RoadGraph& graph, const std::filesystem::path& nodes_csv,
                    const std::filesystem::path& edges_csv) {
  write_text_file(nodes_csv, format_nodes_csv(graph));
  write_text_file(edges_csv, format_edges_csv(graph));
}

std::vector<AmenityPoint> load_amenities_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  t.require_header({"id", "lon", "lat", "amenity"}, "amenities csv");
  std::vector<AmenityPoint> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    AmenityPoint a;
    a.id = parse_int_cell(cell_at(row, 0), r + 1, "id");
    a.lon = parse_double_cell(cell_at(row, 1), r + 1, "lon");
    a.lat = parse_double_cell(cell_at(row, 2), r + 1, "lat");
    check_lon_lat(a.lon, a.lat, r + 1);
    a.amenity_kind = cell_at(row, 3);
    out.push_back(std::move(a));
  }
  return out;
}

void write_amenities_csv(const std::vector<AmenityPoint>& amenities,
                         const std::filesystem::path& path) {
  std::vector<const AmenityPoint*> sorted;
  for (const auto& a : amenities) sorted.push_back(&a);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AmenityPoint* a, const AmenityPoint* b) { return a->id < b->id; });
  CsvTable t;
  t.header = {"id", "lon", "lat", "amenity"};
  for (const auto* a : sorted) {
    t.rows.push_back({std::to_string(a->id), format_double(a->lon), format_double(a->lat),
                      a->amenity_kind});
  }
  write_csv(path, t);
}

}  // namespace geoctx
