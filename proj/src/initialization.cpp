#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mcmplan/baseline.hpp"
#include "mcmplan/path.hpp"
#include "mcmplan/solver.hpp"

namespace mcmplan::solver {
namespace {

using Kind = PathSegment::Kind;

// Rudder nodes whose integrated steady-state turn rate K d follows the
// heading of the path, traversed uniformly in normalized time.
std::vector<double> fit_rudder(const std::vector<PathSegment>& path, double psi0, double t_final, const Scenario& s) {
  const std::size_t n = s.solver.n_nodes;
  const std::size_t q_count = 20 * (n - 1) + 1;
  const double len = path_length(path);
  const double delta = 1.0 / static_cast<double>(n - 1);
  const double kt = s.vehicle.gain * t_final;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q_count), static_cast<Eigen::Index>(n));
  Eigen::VectorXd b(static_cast<Eigen::Index>(q_count));
  std::size_t hint = 0;
  for (std::size_t q = 0; q < q_count; ++q) {
    const double sq = static_cast<double>(q) / static_cast<double>(q_count - 1);
    const auto row = static_cast<Eigen::Index>(q);
    // Integral of each hat function from 0 to sq.
    const double pos = sq / delta;
    const auto i = std::min(static_cast<std::size_t>(pos), n - 2);
    const double u = pos - static_cast<double>(i);
    for (std::size_t j = 0; j < i; ++j) {
      a(row, static_cast<Eigen::Index>(j)) += 0.5 * delta;
      a(row, static_cast<Eigen::Index>(j + 1)) += 0.5 * delta;
    }
    a(row, static_cast<Eigen::Index>(i)) += delta * (u - 0.5 * u * u);
    a(row, static_cast<Eigen::Index>(i + 1)) += delta * 0.5 * u * u;
    b(row) = pose_at(path, sq * len, &hint).heading - psi0;
  }
  a *= kt;
  Eigen::MatrixXd normal = a.transpose() * a;
  const double reg = 1e-10 * normal.trace() / static_cast<double>(n);
  normal.diagonal().array() += reg;
  const Eigen::VectorXd d = normal.ldlt().solve(a.transpose() * b);
  std::vector<double> out(n);
  const double lim = s.vehicle.rudder_limit;
  for (std::size_t j = 0; j < n; ++j) out[j] = std::clamp(d(static_cast<Eigen::Index>(j)), -lim, lim);
  return out;
}

struct PatternParams {
  double half_swath;  // lateral half-width credited to one pass
  double end_margin;  // legs stop this far inside the domain's x-extent
  double extension;   // extra length added to both ends of every leg
};

void align_heading(PathBuilder& b, double target_heading, double radius) {
  const double sweep = std::remainder(target_heading - b.heading(), 2.0 * std::numbers::pi);
  b.arc(radius, sweep, Kind::Transit);
}

double tight_radius(const Scenario& s) { return 2.0 * s.vehicle.min_turn_radius(); }

// Boustrophedon over the strip y in [ya, yb] of the bounding box, entered
// from and returning to the start.
std::vector<PathSegment> strip_lawnmower(const Scenario& s, const StartPose& start, double ya, double yb,
                                         const PatternParams& pp) {
  const BoundingBox box = bounding_box(s.domain);
  const double half = pp.half_swath;
  const double avail = (yb - ya) - 2.0 * half;
  std::vector<double> ys;
  double spacing = 2.0 * half;
  if (avail <= 0.0) {
    ys.push_back(0.5 * (ya + yb));
  } else {
    const auto legs = static_cast<std::size_t>(std::ceil(avail / (2.0 * half) - 1e-9)) + 1;
    spacing = legs > 1 ? avail / static_cast<double>(legs - 1) : 2.0 * half;
    for (std::size_t i = 0; i < legs; ++i) ys.push_back(ya + half + static_cast<double>(i) * spacing);
  }
  const double xa = box.x_min + pp.end_margin - pp.extension;
  const double xb = box.x_max - pp.end_margin + pp.extension;
  const double rt = std::max(tight_radius(s), 0.5 * spacing * (1.0 - 1e-9));

  PathBuilder b({start.x, start.y}, start.psi);
  b.turn_towards({xa, ys.front()}, std::min(rt, 100.0), Kind::Transit);
  align_heading(b, 0.0, tight_radius(s));
  ys.front() = b.position().y;
  std::vector<Vec2> wp;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const bool forward = i % 2 == 0;
    if (i > 0) wp.push_back({forward ? xa : xb, ys[i]});
    wp.push_back({forward ? xb : xa, ys[i]});
  }
  b.route(wp, 0.5 * spacing * (1.0 - 1e-9), Kind::Leg);
  b.turn_towards({start.x, start.y}, std::min(rt, 100.0), Kind::Transit);
  return std::move(b.segments());
}

// Inward rectangular spiral over the strip.
std::vector<PathSegment> strip_spiral(const Scenario& s, const StartPose& start, double ya, double yb,
                                      const PatternParams& pp) {
  const BoundingBox box = bounding_box(s.domain);
  const double a = pp.half_swath;
  const double sp = 2.0 * a;
  double left = box.x_min + std::min(a, 0.5 * box.width()) - pp.extension;
  double right = box.x_max - std::min(a, 0.5 * box.width()) + pp.extension;
  double bottom = ya + std::min(a, 0.5 * (yb - ya));
  double top = yb - std::min(a, 0.5 * (yb - ya));
  std::vector<Vec2> wp{{left, bottom}};
  for (;;) {
    if (right - left < sp) break;
    wp.push_back({right, bottom});
    if (top - bottom < sp) break;
    wp.push_back({right, top});
    if (right - left < 2.0 * sp) break;
    wp.push_back({left, top});
    if (top - bottom < 2.0 * sp) break;
    wp.push_back({left, bottom + sp});
    left += sp;
    right -= sp;
    top -= sp;
    bottom += sp;
  }
  if (wp.size() < 2) wp.push_back({right, bottom});
  const double radius = std::max(tight_radius(s), 0.5 * sp * (1.0 - 1e-9));
  PathBuilder b({start.x, start.y}, start.psi);
  b.turn_towards(wp.front(), std::min(radius, 100.0), Kind::Transit);
  const Vec2 d = wp[1] - wp[0];
  align_heading(b, std::atan2(d.y, d.x), tight_radius(s));
  wp.erase(wp.begin());
  b.route(wp, radius, Kind::Leg);
  b.turn_towards({start.x, start.y}, std::min(radius, 100.0), Kind::Transit);
  return std::move(b.segments());
}

using PatternFn = std::vector<PathSegment> (*)(const Scenario&, const StartPose&, double, double,
                                               const PatternParams&);

// One closed pattern per vehicle over equal-height strips. Shorter patterns
// get longer legs so that all vehicles share one horizon.
DecisionVector strip_patterns(const Scenario& s, PatternFn pattern, double half_swath, double end_margin) {
  const BoundingBox box = bounding_box(s.domain);
  const std::size_t k = s.k;
  std::vector<PatternParams> params(k, PatternParams{half_swath, end_margin, 0.0});
  std::vector<std::vector<PathSegment>> paths(k);
  const auto strip = [&](std::size_t v) {
    const double h = box.height() / static_cast<double>(k);
    return std::pair{box.y_min + h * static_cast<double>(v), box.y_min + h * static_cast<double>(v + 1)};
  };
  double longest = 0.0;
  for (std::size_t v = 0; v < k; ++v) {
    const auto [ya, yb] = strip(v);
    paths[v] = pattern(s, s.starts[v], ya, yb, params[v]);
    longest = std::max(longest, path_length(paths[v]));
  }
  for (std::size_t v = 0; v < k; ++v) {
    const auto [ya, yb] = strip(v);
    double lo = 0.0;
    double hi = std::max(1.0, longest - path_length(paths[v]));
    if (path_length(paths[v]) >= longest - 1e-6) continue;
    for (int it = 0; it < 40 && hi - lo > 1e-3; ++it) {
      PatternParams p = params[v];
      p.extension = 0.5 * (lo + hi);
      (path_length(pattern(s, s.starts[v], ya, yb, p)) < longest ? lo : hi) = p.extension;
    }
    params[v].extension = lo;
    paths[v] = pattern(s, s.starts[v], ya, yb, params[v]);
  }

  DecisionVector dv;
  dv.t_final = std::max(longest / s.vehicle.speed, s.solver.t_min);
  for (std::size_t v = 0; v < k; ++v) {
    const auto d = fit_rudder(paths[v], s.starts[v].psi, dv.t_final, s);
    dv.rudder.insert(dv.rudder.end(), d.begin(), d.end());
  }
  return dv;
}

DecisionVector random_pattern(const Scenario& s, double half_swath, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double coverage_time = domain_area(s.domain) / (2.0 * half_swath * s.vehicle.speed);
  DecisionVector dv;
  dv.t_final = std::max(1.2 * coverage_time / static_cast<double>(s.k), s.solver.t_min);
  const double typical = std::min(s.vehicle.rudder_limit, s.vehicle.speed / (s.vehicle.gain * half_swath));
  for (std::size_t i = 0; i < s.k * s.solver.n_nodes; ++i) dv.rudder.push_back((2.0 * uniform() - 1.0) * 2.0 * typical);
  for (double& d : dv.rudder) d = std::clamp(d, -s.vehicle.rudder_limit, s.vehicle.rudder_limit);
  return dv;
}

}  // namespace

bool close_loops(const Scenario& s, const QmcPointSet& pts, DecisionVector& dv, double tol, std::size_t max_iter) {
  const Transcription tr(s, pts, make_grid(dv.t_final, s.solver));
  const std::size_t n = s.solver.n_nodes;
  const double lim = s.vehicle.rudder_limit;
  bool ok = true;
  for (std::size_t v = 0; v < s.k; ++v) {
    Vec2 off;
    std::vector<double> jx, jy;
    tr.terminal_jacobian(dv, v, off, jx, jy);
    std::size_t it = 0;
    while (norm(off) > tol && it++ < max_iter) {
      Eigen::Matrix2d jjt;
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sxx += jx[j] * jx[j];
        sxy += jx[j] * jy[j];
        syy += jy[j] * jy[j];
      }
      jjt << sxx, sxy, sxy, syy;
      jjt.diagonal().array() += 1e-12 * (sxx + syy);
      const Eigen::Vector2d lam = jjt.ldlt().solve(Eigen::Vector2d(off.x, off.y));
      const std::vector<double> saved(dv.rudder.begin() + static_cast<std::ptrdiff_t>(v * n),
                                      dv.rudder.begin() + static_cast<std::ptrdiff_t>((v + 1) * n));
      const double before = norm(off);
      bool improved = false;
      for (double step = 1.0; step > 1e-3; step *= 0.5) {
        for (std::size_t j = 0; j < n; ++j) {
          const double delta = -(jx[j] * lam(0) + jy[j] * lam(1));
          dv.rudder[v * n + j] = std::clamp(saved[j] + step * delta, -lim, lim);
        }
        Vec2 trial_off;
        std::vector<double> tx, ty;
        tr.terminal_jacobian(dv, v, trial_off, tx, ty);
        if (norm(trial_off) < before) {
          off = trial_off;
          jx = std::move(tx);
          jy = std::move(ty);
          improved = true;
          break;
        }
      }
      if (!improved) {
        std::copy(saved.begin(), saved.end(), dv.rudder.begin() + static_cast<std::ptrdiff_t>(v * n));
        break;
      }
    }
    ok = ok && norm(off) <= tol;
  }
  return ok;
}

bool shortest_feasible_scaling(const Scenario& s, const QmcPointSet& pts, DecisionVector& dv) {
  const double tol = 0.5 * s.solver.pos_tol;
  const std::vector<double> turn = [&] {
    std::vector<double> u(dv.rudder.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = dv.rudder[i] * dv.t_final;
    return u;
  }();
  const auto at = [&](double tf) {
    DecisionVector c;
    c.t_final = tf;
    c.rudder.resize(turn.size());
    for (std::size_t i = 0; i < turn.size(); ++i) {
      c.rudder[i] = std::clamp(turn[i] / tf, -s.vehicle.rudder_limit, s.vehicle.rudder_limit);
    }
    return c;
  };
  const auto feasible = [&](DecisionVector& c) {
    if (!close_loops(s, pts, c, tol)) return false;
    const ConstraintValues cv = Transcription(s, pts, make_grid(c.t_final, s.solver)).constraints(c);
    return cv.risk <= s.beta;
  };

  double hi = dv.t_final;
  DecisionVector best = at(hi);
  int grow = 0;
  while (!feasible(best)) {
    if (++grow > 12 || hi * 1.15 > s.solver.t_max) return false;
    hi *= 1.15;
    best = at(hi);
  }
  double lo = hi;
  for (int shrink = 0; shrink < 20; ++shrink) {
    lo = std::max(hi * 0.85, s.solver.t_min);
    DecisionVector c = at(lo);
    if (lo == hi || !feasible(c)) break;
    hi = lo;
    best = std::move(c);
  }
  for (int it = 0; it < 8 && hi - lo > 1e-4 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    DecisionVector c = at(mid);
    if (feasible(c)) {
      hi = mid;
      best = std::move(c);
    } else {
      lo = mid;
    }
  }
  dv = std::move(best);
  return true;
}

DecisionVector initial_guess(const Scenario& s, const QmcPointSet& pts, InitStrategy strategy, std::uint64_t seed) {
  const double w = baseline::effective_swath_halfwidth(s.sensor, s.vehicle, s.baseline.pass_threshold);
  const double look_ahead = s.sensor.height / std::tan(std::max(1e-3, -s.sensor.eps_de));

  std::vector<DecisionVector> candidates;
  if (strategy == InitStrategy::Random) {
    candidates.push_back(random_pattern(s, w, seed));
  } else {
    const PatternFn fn = strategy == InitStrategy::Spiral ? strip_spiral : strip_lawnmower;
    for (const double f : {1.0, 0.9, 0.8, 0.7}) {
      for (const double margin : {0.0, 0.5, 1.0}) {
        if (strategy == InitStrategy::Spiral && margin > 0.0) continue;
        candidates.push_back(strip_patterns(s, fn, f * w, margin * look_ahead));
      }
    }
  }

  // Shortest closed candidate that meets the risk target, else the one with
  // the lowest risk.
  DecisionVector best;
  double best_t = std::numeric_limits<double>::infinity();
  double best_risk = std::numeric_limits<double>::infinity();
  bool best_feasible = false;
  for (DecisionVector& c : candidates) {
    close_loops(s, pts, c, 0.5 * s.solver.pos_tol);
    const ConstraintValues cv = Transcription(s, pts, make_grid(c.t_final, s.solver)).constraints(c);
    const bool feasible = cv.risk <= s.beta;
    const bool better = feasible ? (!best_feasible || c.t_final < best_t) : (!best_feasible && cv.risk < best_risk);
    if (better) {
      best = c;
      best_t = c.t_final;
      best_risk = cv.risk;
      best_feasible = feasible;
    }
  }
  shortest_feasible_scaling(s, pts, best);
  return best;
}

}  // namespace mcmplan::solver
