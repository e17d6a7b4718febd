#include <gtest/gtest.h>

#include "geoctx/error.hpp"
#include "geoctx/geo.hpp"
#include "geoctx/osm_xml.hpp"

namespace geoctx {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::BadConfig;
}

TEST(OsmXml, ThreeNodeResidentialWay) {
  const char* xml = R"(<osm>
    <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.001"/><node id="3" lat="0" lon="0.002"/>
    <way id="10"><nd ref="1"/><nd ref="2"/><nd ref="3"/>
      <tag k="highway" v="residential"/><tag k="maxspeed" v="50"/><tag k="oneway" v="yes"/></way>
  </osm>)";
  const auto out = parse_osm_xml(xml);
  ASSERT_EQ(out.road.nodes.size(), 3u);
  ASSERT_EQ(out.road.edges.size(), 2u);
  for (const auto& e : out.road.edges) {
    EXPECT_EQ(e.maxspeed, 50.0);
    EXPECT_TRUE(e.oneway);
    EXPECT_EQ(e.highway, "residential");
  }
  EXPECT_NEAR(*out.road.edges[0].length, haversine_meters(0, 0, 0.001, 0), 1e-9);
}

TEST(OsmXml, AmenityWithoutWays) {
  const char* xml = R"(<osm><node id="5" lat="1" lon="2"><tag k="amenity" v="cafe"/></node></osm>)";
  const auto out = parse_osm_xml(xml);
  EXPECT_TRUE(out.road.nodes.empty());
  ASSERT_EQ(out.amenities.size(), 1u);
  EXPECT_EQ(out.amenities[0].amenity_kind, "cafe");
  EXPECT_EQ(out.amenities[0].lon, 2.0);
}

TEST(OsmXml, TwoWayProducesAntiparallelPair) {
  const char* xml = R"(<osm><node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="1"/>
    <way id="1"><nd ref="1"/><nd ref="2"/><tag k="highway" v="primary"/></way></osm>)";
  const auto out = parse_osm_xml(xml);
  ASSERT_EQ(out.road.edges.size(), 2u);
  EXPECT_EQ(out.road.edges[0].u, 1);
  EXPECT_EQ(out.road.edges[1].u, 2);
  EXPECT_FALSE(out.road.edges[0].oneway);
  EXPECT_FALSE(out.road.edges[0].maxspeed.has_value());
}

TEST(OsmXml, ReverseOnewayAndNonHighwayWays) {
  const char* xml = R"(<osm><node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="1"/>
    <way id="1"><nd ref="1"/><nd ref="2"/><tag k="highway" v="service"/><tag k="oneway" v="-1"/></way>
    <way id="2"><nd ref="1"/><nd ref="2"/><tag k="building" v="yes"/></way></osm>)";
  const auto out = parse_osm_xml(xml);
  ASSERT_EQ(out.road.edges.size(), 1u);
  EXPECT_EQ(out.road.edges[0].u, 2);
  EXPECT_EQ(out.road.edges[0].v, 1);
}

TEST(OsmXml, Errors) {
  EXPECT_EQ(kind_of([] { parse_osm_xml("<osm><node id='1'"); }), ErrorKind::MalformedXml);
  EXPECT_EQ(kind_of([] {
              parse_osm_xml(R"(<osm><node id="1" lat="0" lon="0"/>
                <way id="1"><nd ref="1"/><nd ref="9"/><tag k="highway" v="primary"/></way></osm>)");
            }),
            ErrorKind::DanglingNodeRef);
}

TEST(OsmXml, BoundingBoxKeepsWaysTouchingIt) {
  const char* xml = R"(<osm><node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="1"/>
    <node id="3" lat="5" lon="5"/><node id="4" lat="5" lon="6"/>
    <way id="1"><nd ref="1"/><nd ref="2"/><tag k="highway" v="primary"/></way>
    <way id="2"><nd ref="3"/><nd ref="4"/><tag k="highway" v="primary"/></way></osm>)";
  const auto out = parse_osm_xml(xml, BoundingBox{-0.5, -0.5, 0.5, 0.5});
  for (const auto& e : out.road.edges) {
    EXPECT_LT(e.u, 3);
    EXPECT_LT(e.v, 3);
  }
  EXPECT_FALSE(out.road.edges.empty());
}

TEST(OsmTags, MaxSpeed) {
  EXPECT_EQ(parse_maxspeed("50"), 50.0);
  EXPECT_NEAR(*parse_maxspeed("30 mph"), 48.28032, 1e-9);
  EXPECT_NEAR(*parse_maxspeed("40 mph"), 64.37376, 1e-9);
  EXPECT_EQ(parse_maxspeed("50;70"), 70.0);
  EXPECT_FALSE(parse_maxspeed("signals").has_value());
  EXPECT_FALSE(parse_maxspeed("").has_value());
}

TEST(OsmTags, Lanes) {
  EXPECT_EQ(parse_lanes("2"), 2);
  EXPECT_EQ(parse_lanes("2;3"), 3);
  EXPECT_FALSE(parse_lanes("0").has_value());
  EXPECT_FALSE(parse_lanes("two").has_value());
}

TEST(OsmFixture, CrossingParsesTenRoadNodes) {
  const auto out = parse_osm_file(std::string(GEOCTX_FIXTURE_DIR) + "/osm/crossing.osm");
  EXPECT_EQ(out.road.nodes.size(), 10u);
  EXPECT_EQ(out.road.edges.size(), 13u);
  EXPECT_EQ(out.amenities.size(), 2u);
}

}  // namespace
}  // namespace geoctx
