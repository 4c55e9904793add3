#include "mcmplan/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mcmplan/exposure_kernel.hpp"

namespace mcmplan {

double LawnmowerPlan::length() const { return path_length(segments); }

double path_time(const LawnmowerPlan& plan) { return plan.speed > 0.0 ? plan.length() / plan.speed : 0.0; }

namespace baseline {

using Kind = PathSegment::Kind;

double single_pass_exposure(double w, const SensorParams& sp, const VehicleParams& vp, double half_length,
                            double dx) {
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_length / dx)) + 1;
  const double h = 2.0 * half_length / static_cast<double>(n - 1);
  std::vector<double> px(n), py(n, w), rate(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = -half_length + static_cast<double>(i) * h;
  kernel::evaluate_rates(sp, px.data(), py.data(), n, {0.0, 0.0, 1.0, 0.0}, rate.data());
  double sum = 0.5 * (rate.front() + rate.back());
  for (std::size_t i = 1; i + 1 < n; ++i) sum += rate[i];
  return sum * h / vp.speed;
}

double effective_swath_halfwidth(const SensorParams& sp, const VehicleParams& vp, double pass_threshold,
                                 double tol) {
  if (!(pass_threshold > 0.0 && pass_threshold < 1.0)) {
    throw std::invalid_argument("effective_swath_halfwidth: pass_threshold must lie in (0, 1)");
  }
  const double needed = -std::log1p(-pass_threshold);
  const auto passes = [&](double w) { return single_pass_exposure(w, sp, vp) >= needed; };

  double hi = 64.0;
  while (passes(hi)) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("effective_swath_halfwidth: no finite swath edge found");
  }
  const int steps = 512;
  const double h = hi / steps;
  double lo = -1.0;
  for (int i = steps - 1; i >= 0; --i) {
    if (passes(h * i)) {
      lo = h * i;
      break;
    }
  }
  if (lo < 0.0) throw std::runtime_error("effective_swath_halfwidth: sensor too weak for the pass threshold");
  double up = lo + h;
  while (up - lo > tol) {
    const double mid = 0.5 * (lo + up);
    (passes(mid) ? lo : up) = mid;
  }
  return lo;
}

StartPose survey_start(const Scenario& s, double swath_halfwidth) {
  if (s.baseline.start) return {s.baseline.start->x, s.baseline.start->y, 0.0};
  const BoundingBox box = bounding_box(s.domain);
  const double margin = std::max(s.baseline.lead_in, 2.0 * s.vehicle.min_turn_radius());
  return {box.x_min - margin, box.y_min + swath_halfwidth, 0.0};
}

LawnmowerPlan lawnmower_path(const Scenario& s, const StartPose& start, double spacing, std::size_t legs,
                             bool return_home) {
  if (!(spacing > 0.0)) throw std::invalid_argument("lawnmower: spacing must be positive");
  if (!is_axis_aligned_rectangle(s.domain)) {
    throw std::invalid_argument("lawnmower: the baseline needs an axis-aligned rectangular domain");
  }
  const double rho_min = s.vehicle.min_turn_radius();
  if (spacing < 2.0 * rho_min) {
    throw std::invalid_argument("lawnmower: spacing is below the minimum turn diameter");
  }
  const BoundingBox box = bounding_box(s.domain);
  if (legs > 0 && !(start.x < box.x_max)) {
    throw std::invalid_argument("lawnmower: start must lie left of the domain's right edge");
  }

  LawnmowerPlan plan;
  plan.spacing = spacing;
  plan.turn_radius = std::max(rho_min, 0.5 * spacing);
  plan.speed = s.vehicle.speed;
  plan.legs = legs;
  plan.start = start;

  const double rho = plan.turn_radius;
  PathBuilder b({start.x, start.y}, 0.0);
  for (std::size_t i = 0; i < legs; ++i) {
    if (i == 0) {
      b.line(box.x_max - start.x, Kind::Leg);
      continue;
    }
    const double side = (i % 2 == 1) ? 1.0 : -1.0;  // left turn at the right edge
    b.arc(rho, side * 0.5 * std::numbers::pi, Kind::Turn);
    b.line(spacing - 2.0 * rho, Kind::Turn);
    b.arc(rho, side * 0.5 * std::numbers::pi, Kind::Turn);
    b.line(box.width(), Kind::Leg);
  }

  if (return_home && legs > 0) {
    const double m = 2.0 * rho_min;
    const Vec2 e = b.position();
    const double x_left = std::min(start.x, box.x_min - m);
    if (legs % 2 == 1) {
      // Ended at the right edge heading +x: go around the top or the bottom.
      const double x_right = box.x_max + m;
      const double below = box.y_min - m;
      const double above = std::max(box.y_max, e.y) + m;
      const double via_below = (e.y - below) + (start.y - below);
      const double via_above = (above - e.y) + (above - start.y);
      const double y_out = via_below <= via_above ? below : above;
      b.route({{x_right, e.y}, {x_right, y_out}, {x_left, y_out}, {x_left, start.y}, {start.x, start.y}}, rho_min,
              Kind::Transit);
    } else {
      b.route({{x_left, e.y}, {x_left, start.y}, {start.x, start.y}}, rho_min, Kind::Transit);
    }
  }

  plan.segments = std::move(b.segments());
  const Vec2 end = b.position();
  plan.end = {end.x, end.y, b.heading()};
  return plan;
}

Trajectory sample_path(const LawnmowerPlan& plan, double dt, const VehicleParams& vp) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_path: dt must be positive");
  Trajectory traj;
  const double total = plan.length();
  const double tf = total / vp.speed;
  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil(tf / dt - 1e-9)));
  traj.dt = steps == 0 ? dt : tf / static_cast<double>(steps);
  traj.states.reserve(steps + 1);
  traj.rudder.reserve(steps + 1);
  if (steps == 0) {
    traj.states.push_back({plan.start.x, plan.start.y, plan.start.psi, 0.0});
    traj.rudder.push_back(0.0);
    return traj;
  }
  std::size_t seg = 0;
  double seg_begin = 0.0;
  for (std::size_t j = 0; j <= steps; ++j) {
    const double s = j == steps ? total : std::min(total, static_cast<double>(j) * traj.dt * vp.speed);
    while (seg + 1 < plan.segments.size() && s >= seg_begin + plan.segments[seg].length) {
      seg_begin += plan.segments[seg].length;
      ++seg;
    }
    const PathSegment& g = plan.segments[seg];
    const double local = std::min(s - seg_begin, g.length);
    const Vec2 p = g.position_at(local);
    const double r = vp.speed * g.curvature;
    traj.states.push_back({p.x, p.y, g.heading_at(local), r});
    traj.rudder.push_back(r / vp.gain);
  }
  return traj;
}

BaselineResult plan_boustrophedon(const ValidatedScenario& vs, const QmcPointSet& pts) {
  const Scenario& s = *vs;
  if (s.k != 1) throw std::invalid_argument("baseline: the boustrophedon planner is single-vehicle (k = 1)");
  if (!is_axis_aligned_rectangle(s.domain)) {
    throw std::invalid_argument("baseline: the boustrophedon planner needs an axis-aligned rectangular domain");
  }
  if (s.baseline.spacing && !(*s.baseline.spacing > 0.0)) {
    throw std::invalid_argument("baseline: spacing must be positive");
  }

  BaselineResult out;
  out.swath_halfwidth = effective_swath_halfwidth(s.sensor, s.vehicle, s.baseline.pass_threshold);
  out.spacing_auto = !s.baseline.spacing;
  const double spacing = s.baseline.spacing ? *s.baseline.spacing : 2.0 * out.swath_halfwidth * s.baseline.overlap;
  const StartPose start = survey_start(s, out.swath_halfwidth);

  const auto risk_of = [](const std::vector<double>& e) {
    double sum = 0.0;
    for (double v : e) sum += std::exp(-v);
    return sum / static_cast<double>(e.size());
  };

  // Grow the tour one leg at a time, accumulating the exposure of each new
  // piece of path.
  std::vector<double> e(pts.size(), 0.0);
  std::size_t legs = 0;
  std::size_t done_segments = 0;
  while (risk_of(e) > s.beta) {
    if (legs == s.baseline.max_legs) {
      throw std::runtime_error("baseline: risk target not reached within max_legs legs");
    }
    ++legs;
    const LawnmowerPlan grown = lawnmower_path(s, start, spacing, legs, false);
    LawnmowerPlan piece = grown;
    piece.segments.assign(grown.segments.begin() + static_cast<std::ptrdiff_t>(done_segments), grown.segments.end());
    piece.start = {piece.segments.front().start.x, piece.segments.front().start.y, piece.segments.front().heading};
    done_segments = grown.segments.size();
    const Trajectory t = sample_path(piece, s.baseline.dt, s.vehicle);
    risk::accumulate_exposure(t, pts.x.data(), pts.y.data(), pts.size(), s.sensor, e.data());
  }

  // The closed tour is re-evaluated on its own uniform sampling; add legs if
  // that evaluation misses the target.
  for (;;) {
    out.plan = lawnmower_path(s, start, spacing, legs, true);
    out.trajectory = sample_path(out.plan, s.baseline.dt, s.vehicle);
    const Trajectory one[] = {out.trajectory};
    out.risk = residual_risk(one, pts, s.sensor, s.risk_mode);
    if (out.risk.value <= s.beta) break;
    if (legs == s.baseline.max_legs) {
      throw std::runtime_error("baseline: risk target not reached within max_legs legs");
    }
    ++legs;
  }
  return out;
}

bool turns_outside(const LawnmowerPlan& plan, const Domain& d) {
  for (const PathSegment& seg : plan.segments) {
    if (seg.kind != PathSegment::Kind::Turn) continue;
    for (int i = 0; i <= 64; ++i) {
      if (contains(d, seg.position_at(seg.length * i / 64.0), -1e-6)) return false;
    }
  }
  return true;
}

}  // namespace baseline
}  // namespace mcmplan
