#include <gtest/gtest.h>

#include <filesystem>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/osm_xml.hpp"
#include "geoctx/road_csv.hpp"

namespace geoctx {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("geoctx-unit-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(RoadCsv, SingleNodeNoEdges) {
  const auto g = parse_road_csv("id,lon,lat\n7,1.5,2.5\n", "");
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.nodes[0].lat, 2.5);
}

TEST(RoadCsv, WrongHeaderIsMissingColumn) {
  try {
    parse_road_csv("id,lat,lon\n1,2,3\n", "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingColumn);
  }
}

TEST(RoadCsv, BadNumericCell) {
  try {
    parse_road_csv("id,lon,lat\n1,abc,3\n", "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadNumericCell);
  }
}

TEST(RoadCsv, DanglingEdge) {
  try {
    parse_road_csv("id,lon,lat\n1,0,0\n", "u,v,maxspeed,lanes,length,oneway,highway,name\n1,2,,,,false,primary,\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingNodeRef);
  }
}

TEST(RoadCsv, EmptyGraphWritesHeaderOnly) {
  RoadGraph g;
  EXPECT_EQ(format_edges_csv(g), "u,v,maxspeed,lanes,length,oneway,highway,name\n");
}

TEST(RoadCsv, FixtureRoundTripIsByteIdentical) {
  const auto road = parse_osm_file(std::string(GEOCTX_FIXTURE_DIR) + "/osm/crossing.osm").road;
  const auto dir = temp_dir("roundtrip");
  write_road_csv(road, dir / "n.csv", dir / "e.csv");
  const auto back = load_road_csv(dir / "n.csv", dir / "e.csv");
  EXPECT_EQ(back, road);
  EXPECT_EQ(format_nodes_csv(back), read_text_file(dir / "n.csv"));
  EXPECT_EQ(format_edges_csv(back), read_text_file(dir / "e.csv"));
  EXPECT_EQ(format_edges_csv(road), format_edges_csv(road));
  fs::remove_all(dir);
}

TEST(RoadCsv, CommaInNameIsQuoted) {
  RoadGraph g;
  g.nodes = {{1, 0, 0}, {2, 1, 1}};
  g.edges.push_back(RoadEdge{1, 2, 30.0, 2, 10.0, true, "primary", "Main St, North"});
  g.canonicalize();
  const auto back = parse_road_csv(format_nodes_csv(g), format_edges_csv(g));
  EXPECT_EQ(back.edges[0].name, "Main St, North");
}

TEST(Amenities, RoundTrip) {
  std::vector<AmenityPoint> a = {{1, 0.5, 0.25, "cafe"}, {2, -1, 3, "school"}};
  const auto dir = temp_dir("amen");
  write_amenities_csv(a, dir / "a.csv");
  EXPECT_EQ(load_amenities_csv(dir / "a.csv"), a);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace geoctx
