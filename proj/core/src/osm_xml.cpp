#include "geoctx/osm_xml.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/geo.hpp"

namespace geoctx {

namespace {

struct RawNode {
  double lon = 0.0;
  double lat = 0.0;
  std::string amenity;
  bool has_amenity = false;
};

struct RawWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> refs;
  std::map<std::string, std::string> tags;
};

enum class Current { None, Node, Way, Other };

struct ParseState {
  std::unordered_map<std::int64_t, RawNode> nodes;
  std::vector<RawWay> ways;
  Current current = Current::None;
  std::int64_t node_id = 0;
  RawWay way;
  int depth = 0;
  int element_depth = 0;
  std::string error;
  XML_Parser parser = nullptr;
};

const char* attr(const XML_Char** atts, const char* name) {
  for (int i = 0; atts[i]; i += 2) {
    if (std::strcmp(atts[i], name) == 0) return atts[i + 1];
  }
  return nullptr;
}

void fail(ParseState& st, std::string msg) {
  if (st.error.empty()) st.error = std::move(msg);
  XML_StopParser(st.parser, XML_FALSE);
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto& st = *static_cast<ParseState*>(data);
  ++st.depth;
  if (std::strcmp(name, "node") == 0 && st.current == Current::None) {
    const char* id = attr(atts, "id");
    const char* lat = attr(atts, "lat");
    const char* lon = attr(atts, "lon");
    auto pid = id ? parse_int(id) : std::nullopt;
    const auto plat = lat ? parse_double(lat) : std::nullopt;
    const auto plon = lon ? parse_double(lon) : std::nullopt;
    if (!pid || !plat || !plon) {
      fail(st, "node element without numeric id/lat/lon");
      return;
    }
    const double lon_v = plon.value_or(0.0);
    const double lat_v = plat.value_or(0.0);
    if (lon_v < -180.0 || lon_v > 180.0 || lat_v < -90.0 || lat_v > 90.0) {
      fail(st, "node " + std::to_string(*pid) + " has out-of-range coordinates");
      return;
    }
    st.current = Current::Node;
    st.element_depth = st.depth;
    st.node_id = *pid;
    auto& n = st.nodes[*pid];
    n.lon = lon_v;
    n.lat = lat_v;
  } else if (std::strcmp(name, "way") == 0 && st.current == Current::None) {
    const char* id = attr(atts, "id");
    auto pid = id ? parse_int(id) : std::nullopt;
    if (!pid) {
      fail(st, "way element without numeric id");
      return;
    }
    st.current = Current::Way;
    st.element_depth = st.depth;
    st.way = RawWay{};
    st.way.id = *pid;
  } else if (std::strcmp(name, "relation") == 0 && st.current == Current::None) {
    st.current = Current::Other;
    st.element_depth = st.depth;
  } else if (std::strcmp(name, "nd") == 0 && st.current == Current::Way) {
    const char* ref = attr(atts, "ref");
    auto pref = ref ? parse_int(ref) : std::nullopt;
    if (!pref) {
      fail(st, "nd element without numeric ref in way " + std::to_string(st.way.id));
      return;
    }
    st.way.refs.push_back(*pref);
  } else if (std::strcmp(name, "tag") == 0) {
    const char* k = attr(atts, "k");
    const char* v = attr(atts, "v");
    if (!k || !v) return;
    if (st.current == Current::Way) {
      st.way.tags[k] = v;
    } else if (st.current == Current::Node && std::strcmp(k, "amenity") == 0) {
      auto& n = st.nodes[st.node_id];
      n.has_amenity = true;
      n.amenity = v;
    }
  }
}

void XMLCALL on_end(void* data, const XML_Char* /*name*/) {
  auto& st = *static_cast<ParseState*>(data);
  if (st.current != Current::None && st.depth == st.element_depth) {
    if (st.current == Current::Way) st.ways.push_back(std::move(st.way));
    st.current = Current::None;
  }
  --st.depth;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t end = value.find(';', start);
    if (end == std::string_view::npos) end = value.size();
    parts.push_back(strip(value.substr(start, end - start)));
    start = end + 1;
  }
  return parts;
}

std::optional<double> parse_single_speed(std::string_view raw) {
  std::string s = lower(strip(raw));
  double factor = 1.0;
  for (std::string_view unit : {"km/h", "kmh", "kph"}) {
    if (s.size() > unit.size() && s.ends_with(unit)) {
      s = strip(std::string_view(s).substr(0, s.size() - unit.size()));
      break;
    }
  }
  if (s.size() > 3 && s.ends_with("mph")) {
    s = strip(std::string_view(s).substr(0, s.size() - 3));
    factor = kKmPerMile;
  }
  auto v = parse_double(s);
  if (!v || !(*v > 0.0) || !std::isfinite(*v)) return std::nullopt;
  return *v * factor;
}

}  // namespace

std::optional<double> parse_maxspeed(std::string_view value) {
  std::optional<double> best;
  for (const auto& part : split_list(value)) {
    if (auto v = parse_single_speed(part)) {
      if (!best || *v > *best) best = v;
    }
  }
  return best;
}

std::optional<int> parse_lanes(std::string_view value) {
  std::optional<int> best;
  for (const auto& part : split_list(value)) {
    auto v = parse_int(part);
    if (!v || *v < 1 || *v > 1000) continue;
    if (!best || *v > *best) best = static_cast<int>(*v);
  }
  return best;
}

OsmExtract parse_osm_xml(std::string_view xml, std::optional<BoundingBox> bbox) {
  ParseState st;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate(nullptr), &XML_ParserFree);
  if (!parser) throw Error(ErrorKind::MalformedXml, "cannot allocate XML parser");
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);

  constexpr std::size_t kChunk = std::size_t{1} << 24;
  std::size_t offset = 0;
  do {
    const std::size_t len = std::min(kChunk, xml.size() - offset);
    const bool last = offset + len == xml.size();
    const auto status =
        XML_Parse(parser.get(), xml.data() + offset, static_cast<int>(len), last ? XML_TRUE : XML_FALSE);
    if (!st.error.empty()) throw Error(ErrorKind::MalformedXml, st.error);
    if (status != XML_STATUS_OK) {
      throw Error(ErrorKind::MalformedXml,
                  std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                      std::to_string(XML_GetCurrentLineNumber(parser.get())));
    }
    offset += len;
  } while (offset < xml.size());

  auto inside = [&](const RawNode& n) { return !bbox || bbox->contains(n.lon, n.lat); };

  OsmExtract out;
  std::map<std::int64_t, const RawNode*> used;
  for (const auto& way : st.ways) {
    auto hw = way.tags.find("highway");
    if (hw == way.tags.end()) continue;
    std::vector<const RawNode*> resolved;
    resolved.reserve(way.refs.size());
    for (std::int64_t ref : way.refs) {
      auto it = st.nodes.find(ref);
      if (it == st.nodes.end()) {
        throw Error(ErrorKind::DanglingNodeRef, "way " + std::to_string(way.id) +
                                                    " references unknown node id " +
                                                    std::to_string(ref));
      }
      resolved.push_back(&it->second);
    }
    if (bbox && std::none_of(resolved.begin(), resolved.end(), [&](const RawNode* n) { return inside(*n); })) continue;

    std::optional<double> maxspeed;
    std::optional<int> lanes;
    std::string name;
    int direction = 0;  // 0 both ways, +1 forward only, -1 reverse only
    if (auto it = way.tags.find("maxspeed"); it != way.tags.end()) maxspeed = parse_maxspeed(it->second);
    if (auto it = way.tags.find("lanes"); it != way.tags.end()) lanes = parse_lanes(it->second);
    if (auto it = way.tags.find("name"); it != way.tags.end()) name = it->second;
    if (auto it = way.tags.find("oneway"); it != way.tags.end()) {
      const std::string ow = lower(strip(it->second));
      if (ow == "yes" || ow == "true" || ow == "1") direction = 1;
      if (ow == "-1" || ow == "reverse") direction = -1;
    }

    for (std::size_t i = 0; i < way.refs.size(); ++i) used.emplace(way.refs[i], resolved[i]);
    for (std::size_t i = 0; i + 1 < way.refs.size(); ++i) {
      const std::int64_t a = way.refs[i];
      const std::int64_t b = way.refs[i + 1];
      if (a == b) continue;
      RoadEdge e;
      e.maxspeed = maxspeed;
      e.lanes = lanes;
      e.length = haversine_meters(resolved[i]->lon, resolved[i]->lat, resolved[i + 1]->lon,
                                  resolved[i + 1]->lat);
      e.oneway = direction != 0;
      e.highway = hw->second;
      e.name = name;
      if (direction >= 0) {
        e.u = a;
        e.v = b;
        out.road.edges.push_back(e);
      }
      if (direction <= 0) {
        e.u = b;
        e.v = a;
        out.road.edges.push_back(e);
      }
    }
  }
  out.road.nodes.reserve(used.size());
  for (const auto& [id, n] : used) out.road.nodes.push_back(RoadNode{id, n->lon, n->lat});
  out.road.directed = true;
  out.road.canonicalize();

  for (const auto& [id, n] : st.nodes) {
    if (n.has_amenity && inside(n)) {
      out.amenities.push_back(AmenityPoint{id, n.lon, n.lat, n.amenity});
    }
  }
  std::sort(out.amenities.begin(), out.amenities.end(),
            [](const AmenityPoint& a, const AmenityPoint& b) { return a.id < b.id; });
  return out;
}

OsmExtract parse_osm_file(const std::filesystem::path& path, std::optional<BoundingBox> bbox) {
  return parse_osm_xml(read_text_file(path), bbox);
}

}  // namespace geoctx
