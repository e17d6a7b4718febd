#include <gtest/gtest.h>

#include <cmath>

#include "geoctx/error.hpp"
#include "geoctx/sensors.hpp"

namespace geoctx {
namespace {

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::BadConfig;
}

TEST(Sensors, FileOrderKept) {
  const auto s = parse_sensors("sensor_id,lon,lat\nc,0,0\na,1,1\nb,2,2\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].id, "c");
  EXPECT_EQ(s[2].id, "b");
  EXPECT_EQ(s.index_of("a"), 1u);
  EXPECT_FALSE(s.index_of("z").has_value());
}

TEST(Sensors, DuplicateId) {
  EXPECT_EQ(kind_of([] { parse_sensors("sensor_id,lon,lat\na,0,0\na,1,1\n"); }),
            ErrorKind::DuplicateSensorId);
}

TEST(Speeds, TwoByTwo) {
  const auto sensors = parse_sensors("sensor_id,lon,lat\na,0,0\nb,1,1\n");
  const auto s = parse_speeds("timestamp,a,b\n2012-03-01T00:00:00,1,2\n2012-03-01T00:05:00,3,\n", sensors);
  ASSERT_EQ(s.length(), 2u);
  EXPECT_EQ(s.at(0, 1), 2.0);
  EXPECT_EQ(s.at(1, 0), 3.0);
  EXPECT_TRUE(is_missing(s.at(1, 1)));
  EXPECT_EQ(s.timestamps[1] - s.timestamps[0], 300);
}

TEST(Speeds, ColumnsReorderedToSensorSet) {
  const auto sensors = parse_sensors("sensor_id,lon,lat\na,0,0\nb,1,1\n");
  const auto s = parse_speeds("timestamp,b,a\n2012-03-01T00:00:00,10,20\n", sensors);
  EXPECT_EQ(s.at(0, 0), 20.0);
  EXPECT_EQ(s.at(0, 1), 10.0);
}

TEST(Speeds, Errors) {
  const auto sensors = parse_sensors("sensor_id,lon,lat\na,0,0\n");
  EXPECT_EQ(kind_of([&] {
              parse_speeds("timestamp,a\n2012-03-01T00:00:00,1\n2012-03-01T00:05:00,1\n"
                           "2012-03-01T00:15:00,1\n", sensors);
            }),
            ErrorKind::NonUniformTimestep);
  EXPECT_EQ(kind_of([&] { parse_speeds("timestamp,a,x\n2012-03-01T00:00:00,1,2\n", sensors); }),
            ErrorKind::UnknownSensorColumn);
  EXPECT_EQ(kind_of([&] { parse_speeds("timestamp,a\n2012-03-01T00:00:00,fast\n", sensors); }),
            ErrorKind::BadNumericCell);
  const auto two = parse_sensors("sensor_id,lon,lat\na,0,0\nb,0,0\n");
  EXPECT_EQ(kind_of([&] { parse_speeds("timestamp,a\n2012-03-01T00:00:00,1\n", two); }),
            ErrorKind::MissingColumn);
}

TEST(Split, FloorArithmetic) {
  const auto a = split_sizes(10, {});
  EXPECT_EQ(a.train, 7u);
  EXPECT_EQ(a.val, 1u);
  EXPECT_EQ(a.test, 2u);
  const auto b = split_sizes(100, {});
  EXPECT_EQ(b.train, 70u);
  EXPECT_EQ(b.val, 10u);
  EXPECT_EQ(b.test, 20u);
}

TEST(Split, EmptyPartIsTooShort) {
  EXPECT_EQ(kind_of([] { split_sizes(5, {}); }), ErrorKind::TooShort);
  EXPECT_EQ(kind_of([] { split_sizes(2, {}); }), ErrorKind::TooShort);
}

TEST(Split, ThirdsOfThree) {
  const auto s = split_sizes(3, SplitSpec{1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(s.train, 1u);
  EXPECT_EQ(s.val, 1u);
  EXPECT_EQ(s.test, 1u);
}

TEST(Split, SlicesAreContiguous) {
  SpeedSeries s;
  s.n_sensors = 1;
  for (int t = 0; t < 20; ++t) {
    s.timestamps.push_back(t * 300);
    s.values.push_back(t);
  }
  const auto sp = temporal_split(s);
  EXPECT_EQ(sp.train.length(), 14u);
  EXPECT_EQ(sp.val.at(0, 0), 14.0);
  EXPECT_EQ(sp.test.at(0, 0), 16.0);
}

TEST(Iso8601, RoundTrip) {
  EXPECT_EQ(parse_iso8601("2012-03-01T00:00:00"), 1330560000);
  EXPECT_EQ(parse_iso8601("2012-03-01 00:05:00Z"), 1330560300);
  EXPECT_FALSE(parse_iso8601("yesterday").has_value());
  EXPECT_EQ(format_iso8601(1330560000).substr(0, 19), "2012-03-01T00:00:00");
}

}  // namespace
}  // namespace geoctx
