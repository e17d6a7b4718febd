#include <gtest/gtest.h>

#include <random>

#include "geoctx/error.hpp"
#include "geoctx/features.hpp"

namespace geoctx {
namespace {

// 20 road nodes on a 5 x 4 lattice with mixed edge attributes and amenities
// placed by hand around a few of them.
struct Fixture20 {
  RoadGraph road;
  std::vector<AmenityPoint> amenities;
};

Fixture20 fixture20() {
  Fixture20 f;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) f.road.nodes.push_back({r * 5 + c + 1, c * 0.01, r * 0.01});
  }
  int k = 0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) {
      const std::int64_t id = r * 5 + c + 1;
      if (c + 1 < 5) {
        RoadEdge e{id, id + 1, {}, {}, {}, true, "residential", ""};
        if (k % 3 != 0) e.maxspeed = 30.0 + 10 * (k % 4);
        if (k % 2 == 0) e.lanes = 1 + k % 3;
        f.road.edges.push_back(e);
        ++k;
      }
      if (r + 1 < 4) {
        RoadEdge e{id + 5, id, {}, {}, {}, true, "primary", ""};
        if (k % 4 != 1) e.maxspeed = 40.0 + 5 * (k % 5);
        if (k % 3 == 1) e.lanes = 2 + k % 2;
        f.road.edges.push_back(e);
        ++k;
      }
    }
  }
  f.road.canonicalize();
  f.amenities = {{900, 0.0, 0.0, "cafe"},       {901, 0.002, 0.001, "bar"},
                 {902, 0.021, 0.0198, "school"}, {903, 0.04, 0.03, "bank"},
                 {904, 0.0395, 0.0305, "bank"},  {905, 0.1, 0.1, "far"}};
  return f;
}

double oracle_value(const Fixture20& f, const RoadNode& node, Feature feat, double radius) {
  switch (feat) {
    case Feature::X:
      return node.lon;
    case Feature::Y:
      return node.lat;
    case Feature::Amenities: {
      double n = 0;
      for (const auto& a : f.amenities) {
        const double dx = a.lon - node.lon;
        const double dy = a.lat - node.lat;
        n += dx * dx + dy * dy <= radius * radius;
      }
      return n;
    }
    case Feature::MaxSpeed:
    case Feature::Lanes: {
      double best = 0.0;
      for (const auto& e : f.road.edges) {
        if (e.u != node.id && e.v != node.id) continue;
        if (feat == Feature::MaxSpeed && e.maxspeed) best = std::max(best, *e.maxspeed);
        if (feat == Feature::Lanes && e.lanes) best = std::max(best, double(*e.lanes));
      }
      return best;
    }
  }
  return -1;
}

TEST(Features, ExhaustiveOracleOnTwentyNodeFixture) {
  const auto f = fixture20();
  FeatureSpec spec;
  spec.features = {Feature::MaxSpeed, Feature::Amenities, Feature::Lanes, Feature::X, Feature::Y};
  spec.amenity_radius = 0.005;
  std::vector<std::int64_t> ids;
  for (const auto& n : f.road.nodes) ids.push_back(n.id);
  const auto m = extract_raw_features(f.road, f.amenities, ids, spec);
  ASSERT_EQ(m.values.rows(), 20);
  ASSERT_EQ(m.values.cols(), 5);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t k = 0; k < spec.size(); ++k) {
      EXPECT_EQ(m.values(i, k), oracle_value(f, f.road.nodes[i], spec.features[k], spec.amenity_radius))
          << "node " << ids[i] << " feature " << feature_name(spec.features[k]);
    }
  }
}

TEST(Features, MaxOverIncidentEdges) {
  RoadGraph g;
  g.nodes = {{1, 0, 0}, {2, 1, 0}, {3, 0, 1}, {4, 1, 1}};
  g.edges = {RoadEdge{1, 2, 40.0, {}, {}, true, "a", ""}, RoadEdge{3, 1, 60.0, {}, {}, true, "a", ""},
             RoadEdge{1, 4, {}, {}, {}, true, "a", ""}};
  g.canonicalize();
  const std::vector<std::int64_t> ids = {1};
  const auto m = extract_raw_features(g, {}, ids, FeatureSpec{});
  EXPECT_EQ(m.values(0, 0), 60.0);
  EXPECT_EQ(m.values(0, 1), 0.0);
}

TEST(Features, UnknownNode) {
  RoadGraph g;
  g.nodes = {{1, 0, 0}};
  const std::vector<std::int64_t> ids = {2};
  try {
    extract_raw_features(g, {}, ids, FeatureSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownNodeId);
  }
}

TEST(Features, FirstN) {
  EXPECT_EQ(FeatureSpec::first_n(3).features,
            (std::vector<Feature>{Feature::MaxSpeed, Feature::Amenities, Feature::Lanes}));
  EXPECT_THROW(FeatureSpec::first_n(0), Error);
  EXPECT_THROW(FeatureSpec::first_n(6), Error);
  EXPECT_EQ(parse_feature("lanes"), Feature::Lanes);
  EXPECT_FALSE(parse_feature("colour").has_value());
}

FeatureMatrix column(std::vector<double> v) {
  FeatureMatrix m;
  m.features = {Feature::X};
  m.values.resize(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m.values(i, 0) = v[i];
  return m;
}

TEST(Scaler, Bounds) {
  const auto b = fit_scaler(column({0, 10}));
  EXPECT_EQ(b.min[0], 0.0);
  EXPECT_EQ(b.max[0], 10.0);
  EXPECT_FALSE(b.constant[0]);
}

TEST(Scaler, ConstantColumnMapsToZero) {
  const auto raw = column({5, 5, 5});
  const auto b = fit_scaler(raw);
  EXPECT_TRUE(b.constant[0]);
  const auto s = apply_scaler(raw, b);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(s.values(i, 0), 0.0);
}

TEST(Scaler, EndpointsClampAndInverse) {
  const auto b = fit_scaler(column({2, 4, 10}));
  const auto s = apply_scaler(column({2, 10, 12, -1, 7.3}), b);
  EXPECT_EQ(s.values(0, 0), 0.0);
  EXPECT_EQ(s.values(1, 0), 1.0);
  EXPECT_EQ(s.values(2, 0), 1.0);
  EXPECT_EQ(s.values(3, 0), 0.0);
  EXPECT_NEAR(b.min[0] + s.values(4, 0) * (b.max[0] - b.min[0]), 7.3, 1e-12);
}

TEST(Scaler, RandomBoundsMatchColumnScan) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0, 5);
  FeatureMatrix m;
  m.values.resize(50, 3);
  for (Eigen::Index i = 0; i < m.values.size(); ++i) m.values.data()[i] = d(rng);
  const auto b = fit_scaler(m);
  for (int k = 0; k < 3; ++k) {
    double lo = m.values(0, k);
    double hi = lo;
    for (int i = 0; i < 50; ++i) {
      lo = std::min(lo, m.values(i, k));
      hi = std::max(hi, m.values(i, k));
    }
    EXPECT_EQ(b.min[k], lo);
    EXPECT_EQ(b.max[k], hi);
  }
}

TEST(Scaler, ColumnMismatch) {
  const auto b = fit_scaler(column({0, 1}));
  FeatureMatrix two;
  two.values = nn::Tensor2::Zero(2, 2);
  try {
    apply_scaler(two, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

}  // namespace
}  // namespace geoctx
