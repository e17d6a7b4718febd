#include "geoctx/geo.hpp"

#include <cmath>
#include <numbers>

namespace geoctx {

namespace {

double central_angle_rad(double lon1, double lat1, double lon2, double lat2) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = lat1 * kDeg;
  const double phi2 = lat2 * kDeg;
  const double dphi = (lat2 - lat1) * kDeg;
  const double dlambda = (lon2 - lon1) * kDeg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * std::asin(std::sqrt(std::min(1.0, a)));
}

}  // namespace

double distance_deg(DistanceMetric metric, double lon1, double lat1, double lon2, double lat2) {
  if (metric == DistanceMetric::Haversine) {
    return central_angle_rad(lon1, lat1, lon2, lat2) * (180.0 / std::numbers::pi);
  }
  const double dx = lon1 - lon2;
  const double dy = lat1 - lat2;
  return std::sqrt(dx * dx + dy * dy);
}

double haversine_meters(double lon1, double lat1, double lon2, double lat2) {
  return kEarthRadiusMeters * central_angle_rad(lon1, lat1, lon2, lat2);
}

}  // namespace geoctx
