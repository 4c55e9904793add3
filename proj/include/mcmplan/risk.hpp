#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/geometry.hpp"
#include "mcmplan/qmc.hpp"
#include "mcmplan/sensor.hpp"

namespace mcmplan {

/// How per-vehicle non-detection factors are combined.
/// PaperSum: sum over vehicles of the expected non-detection, in (0, k].
/// JointExposure: expected non-detection under the summed exposure, in (0, 1].
enum class RiskMode { PaperSum, JointExposure };

std::string to_string(RiskMode m);
RiskMode risk_mode_from_string(const std::string& s);

/// Accumulated exposure per (vehicle, point): values[v * points + p].
struct ExposureTable {
  std::size_t vehicles = 0;
  std::size_t points = 0;
  std::vector<double> values;

  std::span<const double> vehicle(std::size_t v) const {
    return {values.data() + v * points, points};
  }
};

struct RiskEstimate {
  double value = 0.0;
  std::vector<double> per_shift;
  double std_error = 0.0;  // standard error of the shift average
};

struct CoverageGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  BoundingBox box{};
  double seen_threshold = 0.9;
  // Row-major with x fastest: index = iy * nx + ix.
  std::vector<double> center_x, center_y, exposure;
  std::vector<std::uint8_t> seen, valid;

  /// Fraction of valid cells that are seen.
  double seen_fraction() const;
};

namespace risk {

/// Trapezoid-rule weights for a uniformly sampled trajectory.
std::vector<double> trapezoid_weights(std::size_t samples, double dt);

/// Adds the exposure of one trajectory at n points to `out`.
void accumulate_exposure(const Trajectory& traj, const double* px, const double* py, std::size_t n,
                         const SensorParams& sp, double* out);

/// Checks that all trajectories are non-empty and share a final time.
/// Throws std::invalid_argument otherwise.
void check_common_horizon(std::span<const Trajectory> trajs);

/// Combines per-vehicle exposures into the expected non-detection for one
/// point. `stride` is the distance between consecutive vehicles' entries.
double non_detection(const double* e, std::size_t vehicles, std::size_t stride, RiskMode mode);

}  // namespace risk

/// Trapezoid-rule time integral of gamma along the trajectory.
double exposure(const Trajectory& traj, Vec2 omega, const SensorParams& sp);

ExposureTable exposure_table(std::span<const Trajectory> trajs, const QmcPointSet& pts, const SensorParams& sp);

/// Shift-averaged estimate from a precomputed table.
RiskEstimate risk_from_table(const ExposureTable& table, const QmcPointSet& pts, RiskMode mode);

/// Residual risk of the k trajectories. Throws std::invalid_argument when the
/// trajectories do not share a final time.
RiskEstimate residual_risk(std::span<const Trajectory> trajs, const QmcPointSet& pts, const SensorParams& sp,
                           RiskMode mode);

/// Midpoint-rule reference: the bounding box is split into resolution^2
/// cells, each clipped to the domain and evaluated at its clipped centroid
/// with its clipped area as weight. Throws for resolution < 64.
double risk_oracle_grid(std::span<const Trajectory> trajs, const Domain& d, std::size_t resolution,
                        const SensorParams& sp, RiskMode mode);

/// Summed exposure of all vehicles at the centers of an nx by ny grid over the
/// domain's bounding box. Throws for nx or ny < 2.
CoverageGrid coverage_grid(std::span<const Trajectory> trajs, const Domain& d, std::size_t nx, std::size_t ny,
                           const SensorParams& sp, double seen_threshold = 0.9);

}  // namespace mcmplan
