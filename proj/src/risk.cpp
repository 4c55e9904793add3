#include "mcmplan/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcmplan/exposure_kernel.hpp"

namespace mcmplan {

std::string to_string(RiskMode m) { return m == RiskMode::PaperSum ? "paper-sum" : "joint"; }

RiskMode risk_mode_from_string(const std::string& s) {
  if (s == "paper-sum" || s == "PaperSum") return RiskMode::PaperSum;
  if (s == "joint" || s == "JointExposure") return RiskMode::JointExposure;
  throw std::invalid_argument("unknown risk mode '" + s + "' (expected paper-sum or joint)");
}

double CoverageGrid::seen_fraction() const {
  std::size_t n_valid = 0;
  std::size_t n_seen = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    ++n_valid;
    n_seen += seen[i];
  }
  return n_valid == 0 ? 0.0 : static_cast<double>(n_seen) / static_cast<double>(n_valid);
}

namespace risk {

std::vector<double> trapezoid_weights(std::size_t samples, double dt) {
  std::vector<double> w(samples, dt);
  if (samples == 0) return w;
  if (samples == 1) {
    w[0] = 0.0;
    return w;
  }
  w.front() = 0.5 * dt;
  w.back() = 0.5 * dt;
  return w;
}

void accumulate_exposure(const Trajectory& traj, const double* px, const double* py, std::size_t n,
                         const SensorParams& sp, double* out) {
  const auto w = trapezoid_weights(traj.states.size(), traj.dt);
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    if (w[m] == 0.0) continue;
    const auto& s = traj.states[m];
    kernel::accumulate_rates(sp, px, py, n, {s.x, s.y, std::cos(s.psi), std::sin(s.psi)}, w[m], out);
  }
}

void check_common_horizon(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw std::invalid_argument("risk: no trajectories");
  const double tf = trajs.front().final_time();
  for (const auto& t : trajs) {
    if (t.empty()) throw std::invalid_argument("risk: empty trajectory");
    if (std::abs(t.final_time() - tf) > 1e-9 * std::max(1.0, tf)) {
      throw std::invalid_argument("risk: trajectories must share the same final time");
    }
  }
}

double non_detection(const double* e, std::size_t vehicles, std::size_t stride, RiskMode mode) {
  if (mode == RiskMode::PaperSum) {
    double sum = 0.0;
    for (std::size_t v = 0; v < vehicles; ++v) sum += std::exp(-e[v * stride]);
    return sum;
  }
  double total = 0.0;
  for (std::size_t v = 0; v < vehicles; ++v) total += e[v * stride];
  return std::exp(-total);
}

}  // namespace risk

double exposure(const Trajectory& traj, Vec2 omega, const SensorParams& sp) {
  if (traj.empty()) throw std::invalid_argument("exposure: empty trajectory");
  const DetectionModel model(sp);
  const auto w = risk::trapezoid_weights(traj.states.size(), traj.dt);
  double e = 0.0;
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    const auto& s = traj.states[m];
    e += w[m] * model.rate(omega.x - s.x, omega.y - s.y, std::cos(s.psi), std::sin(s.psi));
  }
  return e;
}

ExposureTable exposure_table(std::span<const Trajectory> trajs, const QmcPointSet& pts, const SensorParams& sp) {
  risk::check_common_horizon(trajs);
  ExposureTable table;
  table.vehicles = trajs.size();
  table.points = pts.size();
  table.values.assign(table.vehicles * table.points, 0.0);
  for (std::size_t v = 0; v < trajs.size(); ++v) {
    risk::accumulate_exposure(trajs[v], pts.x.data(), pts.y.data(), table.points, sp,
                              table.values.data() + v * table.points);
  }
  return table;
}

RiskEstimate risk_from_table(const ExposureTable& table, const QmcPointSet& pts, RiskMode mode) {
  if (table.points != pts.size()) throw std::invalid_argument("risk: table does not match point set");
  RiskEstimate est;
  est.per_shift.resize(pts.shifts);
  for (std::size_t r = 0; r < pts.shifts; ++r) {
    double sum = 0.0;
    for (std::size_t j = 0; j < pts.n; ++j) {
      sum += risk::non_detection(table.values.data() + r * pts.n + j, table.vehicles, table.points, mode);
    }
    est.per_shift[r] = sum / static_cast<double>(pts.n);
  }
  double mean = 0.0;
  for (double v : est.per_shift) mean += v;
  mean /= static_cast<double>(pts.shifts);
  est.value = mean;
  if (pts.shifts > 1) {
    double ss = 0.0;
    for (double v : est.per_shift) ss += (v - mean) * (v - mean);
    const double shifts = static_cast<double>(pts.shifts);
    est.std_error = std::sqrt(ss / (shifts - 1.0) / shifts);
  }
  return est;
}

RiskEstimate residual_risk(std::span<const Trajectory> trajs, const QmcPointSet& pts, const SensorParams& sp,
                           RiskMode mode) {
  return risk_from_table(exposure_table(trajs, pts, sp), pts, mode);
}

double risk_oracle_grid(std::span<const Trajectory> trajs, const Domain& d, std::size_t resolution,
                        const SensorParams& sp, RiskMode mode) {
  if (resolution < 64) throw std::invalid_argument("risk_oracle_grid: resolution must be at least 64");
  risk::check_common_horizon(trajs);
  const BoundingBox box = bounding_box(d);
  const double hx = box.width() / static_cast<double>(resolution);
  const double hy = box.height() / static_cast<double>(resolution);

  std::vector<double> px, py, area;
  px.reserve(resolution * resolution);
  py.reserve(resolution * resolution);
  area.reserve(resolution * resolution);
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    const double y0 = box.y_min + static_cast<double>(iy) * hy;
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      const double x0 = box.x_min + static_cast<double>(ix) * hx;
      const ClippedCell cell = clip_box(d, x0, y0, x0 + hx, y0 + hy);
      if (cell.area <= 0.0) continue;
      px.push_back(cell.centroid.x);
      py.push_back(cell.centroid.y);
      area.push_back(cell.area);
    }
  }

  const std::size_t n = px.size();
  std::vector<double> e(trajs.size() * n, 0.0);
  for (std::size_t v = 0; v < trajs.size(); ++v) {
    risk::accumulate_exposure(trajs[v], px.data(), py.data(), n, sp, e.data() + v * n);
  }
  double weighted = 0.0;
  double total_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += area[i] * risk::non_detection(e.data() + i, trajs.size(), n, mode);
    total_area += area[i];
  }
  return weighted / total_area;
}

CoverageGrid coverage_grid(std::span<const Trajectory> trajs, const Domain& d, std::size_t nx, std::size_t ny,
                           const SensorParams& sp, double seen_threshold) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("coverage_grid: need at least 2 cells per axis");
  risk::check_common_horizon(trajs);
  CoverageGrid g;
  g.nx = nx;
  g.ny = ny;
  g.box = bounding_box(d);
  g.seen_threshold = seen_threshold;
  const double hx = g.box.width() / static_cast<double>(nx);
  const double hy = g.box.height() / static_cast<double>(ny);
  const std::size_t n = nx * ny;
  g.center_x.resize(n);
  g.center_y.resize(n);
  g.exposure.assign(n, 0.0);
  g.seen.resize(n);
  g.valid.resize(n);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t i = iy * nx + ix;
      g.center_x[i] = g.box.x_min + (static_cast<double>(ix) + 0.5) * hx;
      g.center_y[i] = g.box.y_min + (static_cast<double>(iy) + 0.5) * hy;
      g.valid[i] = contains(d, {g.center_x[i], g.center_y[i]}) ? 1 : 0;
    }
  }
  for (const auto& t : trajs) {
    risk::accumulate_exposure(t, g.center_x.data(), g.center_y.data(), n, sp, g.exposure.data());
  }
  for (std::size_t i = 0; i < n; ++i) {
    g.seen[i] = -std::expm1(-g.exposure[i]) >= seen_threshold ? 1 : 0;
  }
  return g;
}

}  // namespace mcmplan
