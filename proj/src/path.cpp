#include "mcmplan/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mcmplan {

Vec2 PathSegment::position_at(double s) const {
  if (curvature == 0.0) return start + s * Vec2{std::cos(heading), std::sin(heading)};
  const double h1 = heading + curvature * s;
  return start + (1.0 / curvature) * Vec2{std::sin(h1) - std::sin(heading), std::cos(heading) - std::cos(h1)};
}

double path_length(const std::vector<PathSegment>& segs) {
  double total = 0.0;
  for (const auto& seg : segs) total += seg.length;
  return total;
}

PathPose pose_at(const std::vector<PathSegment>& segs, double s, std::size_t* hint) {
  if (segs.empty()) throw std::invalid_argument("pose_at: empty path");
  std::size_t i = hint ? *hint : 0;
  double begin = 0.0;
  for (std::size_t j = 0; j < i; ++j) begin += segs[j].length;
  while (i + 1 < segs.size() && s >= begin + segs[i].length) {
    begin += segs[i].length;
    ++i;
  }
  if (hint) *hint = i;
  const PathSegment& g = segs[i];
  const double local = std::clamp(s - begin, 0.0, g.length);
  return {g.position_at(local), g.heading_at(local), g.curvature};
}

void PathBuilder::push(const PathSegment& seg) {
  segs_.push_back(seg);
  pos_ = seg.end();
  heading_ = seg.heading_at(seg.length);
}

void PathBuilder::line(double length, PathSegment::Kind kind) {
  if (length <= 0.0) return;
  push({kind, pos_, heading_, length, 0.0});
}

void PathBuilder::arc(double radius, double sweep, PathSegment::Kind kind) {
  if (sweep == 0.0) return;
  push({kind, pos_, heading_, radius * std::abs(sweep), (sweep > 0.0 ? 1.0 : -1.0) / radius});
}

void PathBuilder::route(std::vector<Vec2> waypoints, double radius, PathSegment::Kind kind) {
  std::vector<Vec2> p{pos_};
  for (const Vec2& w : waypoints) {
    if (norm(w - p.back()) > 1e-9) p.push_back(w);
  }
  // Drop interior points where the route goes straight on.
  for (std::size_t j = 1; j + 1 < p.size();) {
    const Vec2 a = p[j] - p[j - 1];
    const Vec2 b = p[j + 1] - p[j];
    if (std::abs(cross(a, b)) <= 1e-12 * norm(a) * norm(b) && dot(a, b) > 0.0) {
      p.erase(p.begin() + static_cast<std::ptrdiff_t>(j));
    } else {
      ++j;
    }
  }
  const std::size_t m = p.size() - 1;
  if (m == 0) return;
  std::vector<double> turn(m + 1, 0.0);
  std::vector<double> tangent(m + 1, 0.0);
  std::vector<double> slope(m + 1, 0.0);
  for (std::size_t j = 1; j < m; ++j) {
    const Vec2 a = p[j] - p[j - 1];
    const Vec2 b = p[j + 1] - p[j];
    turn[j] = std::atan2(cross(a, b), dot(a, b));
    slope[j] = std::tan(0.5 * std::abs(turn[j]));
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double need = slope[j] + slope[j + 1];
    if (need > 0.0) radius = std::min(radius, norm(p[j + 1] - p[j]) / need);
  }
  for (std::size_t j = 0; j <= m; ++j) tangent[j] = radius * slope[j];
  for (std::size_t j = 0; j < m; ++j) {
    const double straight = norm(p[j + 1] - p[j]) - tangent[j] - tangent[j + 1];
    line(std::max(straight, 0.0), kind);
    if (j + 1 < m) arc(radius, turn[j + 1], kind);
  }
}

void PathBuilder::turn_towards(Vec2 target, double radius, PathSegment::Kind kind) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (int attempt = 0; attempt < 12; ++attempt, radius *= 0.5) {
    double best_len = std::numeric_limits<double>::infinity();
    double best_sweep = 0.0;
    for (const double side : {1.0, -1.0}) {
      const Vec2 c = pos_ + radius * Vec2{-side * std::sin(heading_), side * std::cos(heading_)};
      const Vec2 dvec = target - c;
      const double dist = norm(dvec);
      if (dist <= radius) continue;
      const double bearing = std::atan2(dvec.y, dvec.x);
      const double phi = bearing + side * std::asin(radius / dist);
      double sweep = std::fmod(side * (phi - heading_), two_pi);
      if (sweep < 0.0) sweep += two_pi;
      if (sweep > two_pi - 1e-12) sweep = 0.0;
      const double straight = std::sqrt(dist * dist - radius * radius);
      const double len = radius * sweep + straight;
      if (len < best_len) {
        best_len = len;
        best_sweep = side * sweep;
      }
    }
    if (std::isfinite(best_len)) {
      arc(radius, best_sweep, kind);
      line(norm(target - pos_), kind);
      return;
    }
  }
  const Vec2 d = target - pos_;
  heading_ += std::remainder(std::atan2(d.y, d.x) - heading_, two_pi);
  line(norm(d), kind);
}

}  // namespace mcmplan
