#pragma once

#include <vector>

#include "mcmplan/geometry.hpp"

namespace mcmplan {

/// Constant-curvature piece of a planar path: a straight line when
/// curvature is zero, a circular arc otherwise (positive = counter-clockwise).
struct PathSegment {
  enum class Kind { Leg, Turn, Transit };
  Kind kind = Kind::Transit;
  Vec2 start{};
  double heading = 0.0;
  double length = 0.0;
  double curvature = 0.0;

  Vec2 position_at(double s) const;
  double heading_at(double s) const { return heading + curvature * s; }
  Vec2 end() const { return position_at(length); }
};

double path_length(const std::vector<PathSegment>& segs);

struct PathPose {
  Vec2 position;
  double heading;    // unwrapped
  double curvature;
};

/// Pose at arc length s (clamped to the path). Segments are searched from
/// `hint` onward, which makes monotone sweeps linear.
PathPose pose_at(const std::vector<PathSegment>& segs, double s, std::size_t* hint = nullptr);

/// Appends lines and arcs while tracking the end pose. Headings are kept
/// unwrapped.
class PathBuilder {
 public:
  PathBuilder(Vec2 p, double heading) : pos_(p), heading_(heading) {}

  void line(double length, PathSegment::Kind kind);
  void arc(double radius, double sweep, PathSegment::Kind kind);

  /// Straight lines through the waypoints with fillets of the given radius at
  /// the corners. The direction to the first waypoint must match the
  /// current heading. When two corners are too close for the radius, the
  /// largest radius that fits is used for every fillet.
  void route(std::vector<Vec2> waypoints, double radius, PathSegment::Kind kind);

  /// Turns on a circle of the given radius (left or right, whichever gives the
  /// shorter path) until the heading points at target, then drives straight
  /// to it. The radius is halved while the target lies inside both circles.
  void turn_towards(Vec2 target, double radius, PathSegment::Kind kind);

  Vec2 position() const { return pos_; }
  double heading() const { return heading_; }
  std::vector<PathSegment>& segments() { return segs_; }

 private:
  void push(const PathSegment& seg);

  Vec2 pos_;
  double heading_;
  std::vector<PathSegment> segs_;
};

}  // namespace mcmplan
