#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "geoctx/error.hpp"
#include "geoctx/pipeline.hpp"
#include "geoctx/sampler.hpp"
#include "geoctx/synthetic_city.hpp"

namespace geoctx {
namespace {

// One road node per sensor, so the quotient reproduces the given edges.
struct Identity {
  RoadGraph road;
  QuotientGraph q;
};

Identity identity_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Identity g;
  std::vector<Sensor> sensors;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i % 10);
    const double y = static_cast<double>(i / 10);
    g.road.nodes.push_back({static_cast<std::int64_t>(i + 1), x, y});
    sensors.push_back({"n" + std::to_string(i), x, y});
  }
  for (auto [a, b] : edges) {
    g.road.edges.push_back(RoadEdge{static_cast<std::int64_t>(a + 1), static_cast<std::int64_t>(b + 1),
                                    50.0, 2, {}, false, "primary", ""});
  }
  g.road.canonicalize();
  const SensorSet s(std::move(sensors));
  g.q = build_quotient(g.road, s, match_sensors(g.road, s));
  return g;
}

TEST(Representatives, SingletonsAlwaysRoot) {
  const auto g = identity_graph(6, {{0, 1}, {1, 2}});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sq = sample_representatives(g.q, seed);
    for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(sq.representative_of[s], g.q.clusters.root_of[s]);
  }
}

TEST(Representatives, DeterministicAndInCluster) {
  CityParams p;
  p.n_sensors = 20;
  const auto city = generate_city(p);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const auto a = sample_representatives(q, 42);
  EXPECT_EQ(a, sample_representatives(q, 42));
  for (std::size_t s = 0; s < q.size(); ++s) {
    const auto& m = q.clusters.members[s];
    EXPECT_NE(std::find(m.begin(), m.end(), a.representative_of[s]), m.end());
  }
}

TEST(Bfs, PathPrefix) {
  std::vector<std::pair<std::size_t, std::size_t>> path;
  for (std::size_t i = 0; i + 1 < 10; ++i) path.emplace_back(i, i + 1);
  const auto g = identity_graph(10, path);
  const auto sub = bfs_subgraph(g.q, 0, 3);
  EXPECT_EQ(sub.sensors, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(sub.has_edge(0, 1));
  EXPECT_FALSE(sub.has_edge(0, 2));
}

TEST(Bfs, IsolatedRoot) {
  const auto g = identity_graph(4, {{0, 1}, {1, 2}});
  const auto sub = bfs_subgraph(g.q, 3, 64);
  EXPECT_EQ(sub.sensors, (std::vector<std::size_t>{3}));
  EXPECT_TRUE(sub.edges.empty());
  EXPECT_EQ(sub.adjacency_matrix().size(), 1);
  EXPECT_EQ(sub.adjacency_matrix()(0, 0), 0.0);
}

TEST(Bfs, UnknownRootId) {
  const auto g = identity_graph(3, {});
  const auto sq = sample_representatives(g.q, 1);
  try {
    bfs_subgraph(sq, "nope", 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownRoot);
  }
  EXPECT_EQ(bfs_subgraph(sq, "n2", 3).sensors, (std::vector<std::size_t>{2}));
}

// Independent BFS over an edge list (adjacency rebuilt from scratch).
std::vector<std::size_t> oracle_bfs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                    std::size_t root, std::size_t n_max) {
  std::vector<std::set<std::size_t>> adj(n);
  for (auto [a, b] : edges) {
    if (a == b) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<std::size_t> order;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty() && order.size() < n_max) {
    const auto u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return order;
}

TEST(Bfs, RandomGraphAgainstIndependentBfs) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> node(0, 99);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (int k = 0; k < 150; ++k) edges.emplace_back(node(rng), node(rng));
  const auto g = identity_graph(100, edges);
  for (std::size_t root = 0; root < 100; root += 7) {
    for (std::size_t n_max : {1, 5, 17, 64, 100}) {
      const auto sub = bfs_subgraph(g.q, root, n_max);
      const auto want = oracle_bfs(100, edges, root, n_max);
      EXPECT_EQ(std::set<std::size_t>(sub.sensors.begin(), sub.sensors.end()),
                std::set<std::size_t>(want.begin(), want.end()));
      EXPECT_EQ(sub.sensors.front(), root);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        for (std::size_t j = 0; j < sub.size(); ++j) {
          EXPECT_EQ(sub.has_edge(i, j), g.q.has_edge(sub.sensors[i], sub.sensors[j]));
        }
      }
    }
  }
}

TEST(Pairs, SingletonClustersGiveIdenticalViews) {
  const auto g = identity_graph(8, {{0, 1}, {1, 2}, {2, 3}, {5, 6}});
  const PairSampler sampler(g.q, g.road, {}, FeatureSpec::first_n(5));
  const auto p = sampler.make_pair(1, 64, 9);
  EXPECT_EQ(p.f1, p.f2);
  EXPECT_EQ(p.g1, p.g2);
}

TEST(Pairs, MultiMemberClustersShareTopologyAndDiffer) {
  CityParams cp;
  cp.n_sensors = 20;
  const auto city = generate_city(cp);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const PairSampler sampler(q, city.road, city.amenities, FeatureSpec::first_n(5));
  std::size_t differing = 0;
  for (std::size_t root = 0; root < q.size(); ++root) {
    const auto p = sampler.make_pair(root, 64, root);
    EXPECT_EQ(p.g1, p.g2);
    EXPECT_EQ(p.f1.rows(), static_cast<Eigen::Index>(p.g1.size()));
    differing += p.f1 != p.f2;
  }
  EXPECT_GT(differing, 0u);
  const auto a = sampler.make_pair(3, 64, 5);
  const auto b = sampler.make_pair(3, 64, 5);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.f2, b.f2);
  EXPECT_EQ(a.reps1, b.reps1);
}

TEST(Pairs, ScaledFeaturesInUnitRange) {
  CityParams cp;
  cp.n_sensors = 12;
  const auto city = generate_city(cp);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const PairSampler sampler(q, city.road, city.amenities, FeatureSpec::first_n(5));
  EXPECT_GE(sampler.scaled_table().minCoeff(), 0.0);
  EXPECT_LE(sampler.scaled_table().maxCoeff(), 1.0);
}

TEST(SplitSeed, StreamsDiffer) {
  EXPECT_NE(split_seed(1, 0), split_seed(1, 1));
  EXPECT_NE(split_seed(1, 0), split_seed(2, 0));
  EXPECT_EQ(split_seed(7, 3), split_seed(7, 3));
}

}  // namespace
}  // namespace geoctx
