#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace geoctx {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Static 2-d tree over a point set, Euclidean metric. Queries return indices
// into the construction vector. Exact ties are broken towards the smaller index
// so that results agree with a linear scan in input order.
class KdTree2 {
 public:
  KdTree2() = default;
  explicit KdTree2(std::vector<Point2> points);

  std::size_t size() const { return points_.size(); }
  const Point2& point(std::size_t i) const { return points_[i]; }

  std::optional<std::size_t> nearest(Point2 q) const {
    return nearest_if(q, [](std::size_t) { return true; });
  }

  // Nearest point among those for which accept(index) holds.
  template <class Accept>
  std::optional<std::size_t> nearest_if(Point2 q, Accept&& accept) const {
    Best best;
    if (!order_.empty()) search(0, order_.size(), 0, q, accept, best);
    if (best.index == kNone) return std::nullopt;
    return best.index;
  }

  // Number of points p with |p - q|^2 <= r^2.
  std::size_t count_within(Point2 q, double radius) const;

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t index = kNone;
  };

  void build(std::size_t lo, std::size_t hi, int depth);
  std::size_t count(std::size_t lo, std::size_t hi, int depth, Point2 q, double r2) const;

  static double coord(const Point2& p, int axis) { return axis == 0 ? p.x : p.y; }

  template <class Accept>
  void search(std::size_t lo, std::size_t hi, int depth, Point2 q, Accept& accept,
              Best& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t idx = order_[mid];
    const Point2& p = points_[idx];
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double d2 = dx * dx + dy * dy;
    if ((d2 < best.d2 || (d2 == best.d2 && idx < best.index)) && accept(idx)) {
      best.d2 = d2;
      best.index = idx;
    }
    const int axis = depth & 1;
    const double diff = coord(q, axis) - coord(p, axis);
    const bool left_first = diff <= 0.0;
    const std::size_t a_lo = left_first ? lo : mid + 1;
    const std::size_t a_hi = left_first ? mid : hi;
    const std::size_t b_lo = left_first ? mid + 1 : lo;
    const std::size_t b_hi = left_first ? hi : mid;
    search(a_lo, a_hi, depth + 1, q, accept, best);
    // Ties on the splitting plane can live on either side.
    if (diff * diff <= best.d2) search(b_lo, b_hi, depth + 1, q, accept, best);
  }

  std::vector<Point2> points_;
  std::vector<std::size_t> order_;
};

}  // namespace geoctx
