#pragma once

#include <array>
#include <cmath>

namespace mcmplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct BoundingBox {
  double x_min, x_max, y_min, y_max;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

/// Convex quadrilateral survey area. Vertices are in meters, counter-clockwise.
struct Domain {
  std::array<Vec2, 4> vertices{};

  static Domain rectangle(double x_min, double y_min, double x_max, double y_max) {
    return Domain{{Vec2{x_min, y_min}, Vec2{x_max, y_min}, Vec2{x_max, y_max}, Vec2{x_min, y_max}}};
  }
};

/// Shoelace area (signed: positive for counter-clockwise vertex order).
double signed_area(const Domain& d);
double domain_area(const Domain& d);

/// True when every vertex is finite, the quadrilateral is counter-clockwise,
/// strictly convex at each vertex and has positive area.
bool is_convex(const Domain& d);

/// Axis-aligned rectangle test (up to a relative tolerance on the coordinates).
bool is_axis_aligned_rectangle(const Domain& d);

BoundingBox bounding_box(const Domain& d);

/// Point-in-domain test, inclusive of the boundary within `tol` meters.
bool contains(const Domain& d, Vec2 p, double tol = 1e-9);

/// Euclidean distance from p to the domain; zero inside.
/// When `grad` is non-null and p is outside, receives d(distance)/dp.
double distance_outside(const Domain& d, Vec2 p, Vec2* grad = nullptr);

/// Measure-preserving map from the unit square onto the domain.
///
/// Parallelograms (including axis-aligned rectangles) use the affine map
/// spanned by the edges at vertex 0, which is the per-axis inverse uniform
/// CDF for rectangles. General convex quadrilaterals are split along the
/// v0-v2 diagonal; u.x selects the triangle in proportion to its area and
/// the rescaled coordinates go through the square-to-triangle map
/// (1 - sqrt(s)) A + sqrt(s) (1 - t) B + sqrt(s) t C.
Vec2 map_unit_square(const Domain& d, Vec2 u);

/// Intersection area and centroid of an axis-aligned box with the domain.
struct ClippedCell {
  double area = 0.0;
  Vec2 centroid{};
};
ClippedCell clip_box(const Domain& d, double x0, double y0, double x1, double y1);

}  // namespace mcmplan
