#pragma once

#include <algorithm>
#include <compare>
#include <span>
#include <vector>

namespace herdtrack {

struct Point {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
};

struct PointD {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointD&, const PointD&) = default;
};

/// Inclusive axis-aligned rectangle.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = -1;
  int y_max = -1;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  long long area() const noexcept { return static_cast<long long>(width()) * height(); }
  bool contains(double x, double y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  void expand(int x, int y) noexcept {
    if (x_max < x_min) {
      x_min = x_max = x;
      y_min = y_max = y;
      return;
    }
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Area of intersection of two inclusive rectangles (0 when disjoint).
long long overlap_area(const BBox& a, const BBox& b) noexcept;

/// Twice the signed area of triangle (o, a, b); positive when counter-clockwise.
inline long long cross(const Point& o, const Point& a, const Point& b) noexcept {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) - static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

/// Convex hull by Andrew's monotone chain. Vertices counter-clockwise (y axis
/// up convention of the cross product), starting at the lowest-x, lowest-y
/// point, with collinear points dropped. Duplicates are allowed in the input.
/// Throws DegenerateGeometry for fewer than 3 distinct points or a collinear set.
std::vector<Point> convex_hull(std::span<const Point> points);

/// Shoelace area of a simple polygon (absolute value).
double polygon_area(std::span<const Point> polygon);

/// Perimeter lattice-point count of a convex lattice polygon (Pick's B).
long long boundary_lattice_points(std::span<const Point> polygon);

/// True when p lies inside or on the boundary of a counter-clockwise convex polygon.
bool in_convex_polygon(std::span<const Point> polygon, const Point& p);

}  // namespace herdtrack
