#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "geoctx/error.hpp"
#include "geoctx/quotient.hpp"
#include "geoctx/spatial_index.hpp"
#include "oracles.hpp"

namespace geoctx {
namespace {

RoadGraph road_of(std::vector<RoadNode> nodes, std::vector<std::pair<int, int>> edges) {
  RoadGraph g;
  g.nodes = std::move(nodes);
  for (auto [u, v] : edges) {
    g.edges.push_back(RoadEdge{u, v, {}, {}, {}, false, "residential", ""});
    g.edges.push_back(RoadEdge{v, u, {}, {}, {}, false, "residential", ""});
  }
  g.canonicalize();
  return g;
}

SensorSet sensors_at(std::vector<std::pair<double, double>> pts) {
  std::vector<Sensor> s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.push_back(Sensor{"s" + std::to_string(i), pts[i].first, pts[i].second});
  }
  return SensorSet(std::move(s));
}

TEST(KdTree, MatchesLinearScan) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cell(0, 30);
  std::vector<Point2> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({cell(rng) * 0.1, cell(rng) * 0.1});
  const KdTree2 tree(pts);
  for (int k = 0; k < 500; ++k) {
    const Point2 q{cell(rng) * 0.1 + 0.05 * (k % 2), cell(rng) * 0.1};
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t within = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = (pts[i].x - q.x) * (pts[i].x - q.x) + (pts[i].y - q.y) * (pts[i].y - q.y);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
      within += d <= 0.25 * 0.25;
    }
    EXPECT_EQ(*tree.nearest(q), best);
    EXPECT_EQ(tree.count_within(q, 0.25), within);
  }
}

TEST(KdTree, EmptyTree) {
  const KdTree2 tree;
  EXPECT_FALSE(tree.nearest({0, 0}).has_value());
}

TEST(Match, SensorsOnTopOfNodes) {
  const auto road = road_of({{1, 0, 0}, {2, 1, 0}, {3, 2, 0}, {4, 3, 0}, {5, 4, 0}}, {});
  const auto c = match_sensors(road, sensors_at({{1, 0}, {3, 0}}));
  EXPECT_EQ(c.root_of, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(c.cluster_of, (std::vector<std::int32_t>{0, 0, 0, 1, 1}));
  EXPECT_TRUE(c.is_root(1));
  EXPECT_FALSE(c.is_root(0));
  EXPECT_EQ(c.distance[1], 0.0);
}

TEST(Match, SharedNearestNodeGoesToFirstSensor) {
  const auto road = road_of({{1, 0, 0}, {2, 1, 0}, {3, 5, 0}}, {});
  const auto c = match_sensors(road, sensors_at({{0.1, 0}, {0, 0}}));
  EXPECT_EQ(c.root_of[0], 0u);
  EXPECT_EQ(c.root_of[1], 1u);
}

TEST(Match, TooFewRoadNodes) {
  const auto road = road_of({{1, 0, 0}}, {});
  try {
    match_sensors(road, sensors_at({{0, 0}, {1, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotEnoughRoadNodes);
  }
}

TEST(Match, RandomAgainstBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testing::random_instance(seed, 200, 10);
    const auto c = match_sensors(inst.road, inst.sensors);
    const auto o = testing::oracle_match(inst.road, inst.sensors);
    EXPECT_EQ(c.root_of, o.root_of);
    EXPECT_EQ(c.cluster_of, o.cluster_of);
  }
}

TEST(Match, HaversineScanAgreesOnSmallInstance) {
  const auto road = road_of({{1, 0, 0}, {2, 0.01, 0}, {3, 0.02, 0}}, {});
  const auto c = match_sensors(road, sensors_at({{0.019, 0}}), DistanceMetric::Haversine);
  EXPECT_EQ(c.root_of[0], 2u);
}

TEST(Quotient, IdentityRelationCollapsesParallelEdges) {
  auto road = road_of({{1, 0, 0}, {2, 1, 0}, {3, 2, 0}}, {{1, 2}, {2, 3}});
  road.edges.push_back(RoadEdge{1, 2, 50.0, {}, {}, true, "primary", ""});
  road.canonicalize();
  const auto s = sensors_at({{0, 0}, {1, 0}, {2, 0}});
  const auto q = build_quotient(road, s, match_sensors(road, s));
  EXPECT_EQ(q.edge_count(), 2u);
  EXPECT_TRUE(q.has_edge(0, 1));
  EXPECT_TRUE(q.has_edge(1, 0));
  EXPECT_FALSE(q.has_edge(0, 2));
  EXPECT_EQ(q.multiplicity[0 * 3 + 1], 3u);
  EXPECT_EQ(q.neighbors[1], (std::vector<std::size_t>{0, 2}));
}

TEST(Quotient, DisconnectedComponentGivesIsolatedNode) {
  const auto road = road_of({{1, 0, 0}, {2, 1, 0}, {3, 9, 9}, {4, 9.5, 9}}, {{1, 2}, {3, 4}});
  const auto s = sensors_at({{0, 0}, {1, 0}, {9, 9}});
  const auto q = build_quotient(road, s, match_sensors(road, s));
  EXPECT_EQ(q.isolated_nodes(), (std::vector<std::size_t>{2}));
}

TEST(Quotient, DirectedKeepsOrientation) {
  RoadGraph road;
  road.nodes = {{1, 0, 0}, {2, 1, 0}};
  road.edges.push_back(RoadEdge{1, 2, {}, {}, {}, true, "primary", ""});
  road.canonicalize();
  const auto s = sensors_at({{0, 0}, {1, 0}});
  const auto q = build_quotient(road, s, match_sensors(road, s), true);
  EXPECT_TRUE(q.has_edge(0, 1));
  EXPECT_FALSE(q.has_edge(1, 0));
}

TEST(Prune, InfiniteEpsilonIsNoOp) {
  const auto inst = testing::random_instance(11);
  const auto q = build_quotient(inst.road, inst.sensors, match_sensors(inst.road, inst.sensors));
  const auto p = prune_clusters(q, inst.road, inst.sensors, std::numeric_limits<double>::infinity());
  EXPECT_EQ(p.clusters, q.clusters);
  EXPECT_EQ(p.adjacency, q.adjacency);
}

TEST(Prune, TinyEpsilonLeavesRoots) {
  const auto inst = testing::random_instance(12);
  const auto q = build_quotient(inst.road, inst.sensors, match_sensors(inst.road, inst.sensors));
  const auto p = prune_clusters(q, inst.road, inst.sensors, 1e-12);
  for (std::size_t s = 0; s < p.size(); ++s) {
    // Roots survive; any other member would have to sit on the sensor itself.
    ASSERT_FALSE(p.clusters.members[s].empty());
    EXPECT_TRUE(std::find(p.clusters.members[s].begin(), p.clusters.members[s].end(),
                          p.clusters.root_of[s]) != p.clusters.members[s].end());
    for (auto m : p.clusters.members[s]) {
      EXPECT_TRUE(m == p.clusters.root_of[s] || p.clusters.distance[m] == 0.0);
    }
  }
}

TEST(Prune, RejectsNonPositiveEpsilon) {
  const auto inst = testing::random_instance(13);
  const auto q = build_quotient(inst.road, inst.sensors, match_sensors(inst.road, inst.sensors));
  EXPECT_THROW(prune_clusters(q, inst.road, inst.sensors, 0.0), Error);
}

TEST(Prune, RandomAgainstFilterThenRequotient) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto inst = testing::random_instance(seed);
    const auto c = match_sensors(inst.road, inst.sensors);
    const auto q = build_quotient(inst.road, inst.sensors, c);
    const auto p = prune_clusters(q, inst.road, inst.sensors, 0.01);
    const auto op = testing::oracle_prune(testing::oracle_match(inst.road, inst.sensors), inst.road,
                                          inst.sensors, 0.01);
    const auto oq = testing::oracle_quotient(inst.road, op, inst.sensors.size(), false);
    EXPECT_EQ(p.clusters.cluster_of, op.cluster_of);
    EXPECT_EQ(p.adjacency, oq.adjacency);
  }
}

}  // namespace
}  // namespace geoctx
