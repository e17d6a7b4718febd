#include "geoctx/spatial_index.hpp"

#include <algorithm>
#include <numeric>

namespace geoctx {

KdTree2::KdTree2(std::vector<Point2> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  build(0, order_.size(), 0);
}

void KdTree2::build(std::size_t lo, std::size_t hi, int depth) {
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const int axis = depth & 1;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::size_t a, std::size_t b) {
                     const double ca = coord(points_[a], axis);
                     const double cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  build(lo, mid, depth + 1);
  build(mid + 1, hi, depth + 1);
}

std::size_t KdTree2::count_within(Point2 q, double radius) const {
  if (order_.empty() || radius < 0.0) return 0;
  return count(0, order_.size(), 0, q, radius * radius);
}

std::size_t KdTree2::count(std::size_t lo, std::size_t hi, int depth, Point2 q,
                           double r2) const {
  if (lo >= hi) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  const Point2& p = points_[order_[mid]];
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  std::size_t n = (dx * dx + dy * dy <= r2) ? 1 : 0;
  const int axis = depth & 1;
  const double diff = coord(q, axis) - coord(p, axis);
  if (diff <= 0.0 || diff * diff <= r2) n += count(lo, mid, depth + 1, q, r2);
  if (diff >= 0.0 || diff * diff <= r2) n += count(mid + 1, hi, depth + 1, q, r2);
  return n;
}

}  // namespace geoctx
