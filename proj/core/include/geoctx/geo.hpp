#pragma once

namespace geoctx {

// Distances between (lon, lat) pairs. Euclidean works on raw degrees;
// Haversine returns the great-circle central angle, also in degrees, so that
// thresholds such as the pruning radius keep their unit under either metric.
enum class DistanceMetric { Euclidean, Haversine };

inline constexpr double kEarthRadiusMeters = 6371008.8;

double distance_deg(DistanceMetric metric, double lon1, double lat1, double lon2, double lat2);

double haversine_meters(double lon1, double lat1, double lon2, double lat2);

}  // namespace geoctx
