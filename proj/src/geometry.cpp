#include "herdtrack/geometry.hpp"

#include <cmath>
#include <numeric>

#include "herdtrack/error.hpp"

namespace herdtrack {

long long overlap_area(const BBox& a, const BBox& b) noexcept {
  const int w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const int h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  return (w > 0 && h > 0) ? static_cast<long long>(w) * h : 0;
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "convex hull needs at least 3 distinct points");

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "all points are collinear");
  return hull;
}

double polygon_area(std::span<const Point> polygon) {
  long long twice = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
  }
  return std::abs(static_cast<double>(twice)) / 2.0;
}

long long boundary_lattice_points(std::span<const Point> polygon) {
  long long count = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    count += std::gcd(std::abs(b.x - a.x), std::abs(b.y - a.y));
  }
  return count;
}

bool in_convex_polygon(std::span<const Point> polygon, const Point& p) {
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    if (cross(polygon[i], polygon[(i + 1) % polygon.size()], p) < 0) return false;
  }
  return true;
}

}  // namespace herdtrack
