#include "mcmplan/geometry.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace mcmplan {

double signed_area(const Domain& d) {
  double twice = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    twice += cross(d.vertices[i], d.vertices[(i + 1) % 4]);
  }
  return 0.5 * twice;
}

double domain_area(const Domain& d) { return std::abs(signed_area(d)); }

bool is_convex(const Domain& d) {
  for (const auto& v : d.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
  }
  const BoundingBox box = bounding_box(d);
  const double scale = std::max({box.width(), box.height(), 1e-300});
  if (!(signed_area(d) > 1e-12 * scale * scale)) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a = d.vertices[i];
    const Vec2 b = d.vertices[(i + 1) % 4];
    const Vec2 c = d.vertices[(i + 2) % 4];
    if (norm(b - a) <= 1e-12 * scale) return false;
    if (!(cross(b - a, c - b) > 1e-12 * scale * scale)) return false;
  }
  return true;
}

bool is_axis_aligned_rectangle(const Domain& d) {
  const BoundingBox box = bounding_box(d);
  const double tol = 1e-9 * std::max(box.width(), box.height());
  for (const auto& v : d.vertices) {
    const bool on_x = std::abs(v.x - box.x_min) <= tol || std::abs(v.x - box.x_max) <= tol;
    const bool on_y = std::abs(v.y - box.y_min) <= tol || std::abs(v.y - box.y_max) <= tol;
    if (!on_x || !on_y) return false;
  }
  return std::abs(domain_area(d) - box.width() * box.height()) <= tol * (box.width() + box.height());
}

BoundingBox bounding_box(const Domain& d) {
  BoundingBox b{d.vertices[0].x, d.vertices[0].x, d.vertices[0].y, d.vertices[0].y};
  for (const auto& v : d.vertices) {
    b.x_min = std::min(b.x_min, v.x);
    b.x_max = std::max(b.x_max, v.x);
    b.y_min = std::min(b.y_min, v.y);
    b.y_max = std::max(b.y_max, v.y);
  }
  return b;
}

bool contains(const Domain& d, Vec2 p, double tol) {
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a = d.vertices[i];
    const Vec2 b = d.vertices[(i + 1) % 4];
    const Vec2 e = b - a;
    // signed distance of p to the left of edge a->b
    if (cross(e, p - a) / norm(e) < -tol) return false;
  }
  return true;
}

namespace {

Vec2 closest_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 e = b - a;
  const double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
  return a + t * e;
}

}  // namespace

double distance_outside(const Domain& d, Vec2 p, Vec2* grad) {
  if (contains(d, p, 0.0)) {
    if (grad) *grad = {0.0, 0.0};
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 q = closest_on_segment(d.vertices[i], d.vertices[(i + 1) % 4], p);
    const double dist = norm(p - q);
    if (dist < best) {
      best = dist;
      best_point = q;
    }
  }
  if (grad) {
    *grad = best > 0.0 ? (1.0 / best) * (p - best_point) : Vec2{0.0, 0.0};
  }
  return best;
}

Vec2 map_unit_square(const Domain& d, Vec2 u) {
  const auto& v = d.vertices;
  const Vec2 e1 = v[1] - v[0];
  const Vec2 e3 = v[3] - v[0];
  const Vec2 skew = (v[0] + v[2]) - (v[1] + v[3]);
  const double scale = norm(e1) + norm(e3);
  if (norm(skew) <= 1e-12 * scale) {
    return v[0] + u.x * e1 + u.y * e3;
  }

  const double a1 = 0.5 * std::abs(cross(v[1] - v[0], v[2] - v[0]));
  const double a2 = 0.5 * std::abs(cross(v[2] - v[0], v[3] - v[0]));
  const double split = a1 / (a1 + a2);

  Vec2 A, B, C;
  double s;
  if (u.x < split) {
    A = v[0];
    B = v[1];
    C = v[2];
    s = u.x / split;
  } else {
    A = v[0];
    B = v[2];
    C = v[3];
    s = (u.x - split) / (1.0 - split);
  }
  const double root = std::sqrt(s);
  return (1.0 - root) * A + (root * (1.0 - u.y)) * B + (root * u.y) * C;
}

ClippedCell clip_box(const Domain& d, double x0, double y0, double x1, double y1) {
  // Sutherland-Hodgman: clip the box polygon against each domain edge.
  std::vector<Vec2> poly{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  std::vector<Vec2> next;
  for (std::size_t i = 0; i < 4 && !poly.empty(); ++i) {
    const Vec2 a = d.vertices[i];
    const Vec2 e = d.vertices[(i + 1) % 4] - a;
    next.clear();
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Vec2 p = poly[j];
      const Vec2 q = poly[(j + 1) % poly.size()];
      const double sp = cross(e, p - a);
      const double sq = cross(e, q - a);
      if (sp >= 0.0) next.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        next.push_back(p + t * (q - p));
      }
    }
    poly.swap(next);
  }
  ClippedCell out;
  if (poly.size() < 3) return out;
  double twice = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t j = 0; j < poly.size(); ++j) {
    const Vec2 p = poly[j];
    const Vec2 q = poly[(j + 1) % poly.size()];
    const double c = cross(p, q);
    twice += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  out.area = 0.5 * twice;
  if (out.area > 0.0) {
    out.centroid = {cx / (3.0 * twice), cy / (3.0 * twice)};
  }
  return out;
}

}  // namespace mcmplan
