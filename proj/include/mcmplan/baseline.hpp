#pragma once

#include <cstddef>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/geometry.hpp"
#include "mcmplan/path.hpp"
#include "mcmplan/risk.hpp"
#include "mcmplan/scenario.hpp"
#include "mcmplan/sensor.hpp"

namespace mcmplan {

struct LawnmowerPlan {
  std::vector<PathSegment> segments;
  double spacing = 0.0;      // m
  double turn_radius = 0.0;  // m
  double speed = 0.0;        // m/s
  std::size_t legs = 0;
  StartPose start{};
  StartPose end{};

  double length() const;
};

struct BaselineResult {
  LawnmowerPlan plan;
  Trajectory trajectory;
  RiskEstimate risk;
  double swath_halfwidth = 0.0;  // W used for auto spacing (0 when spacing was given)
  bool spacing_auto = false;
};

namespace baseline {

/// Exposure accrued by a target at perpendicular distance w from a straight
/// pass of half-length half_length, integrated with step dx.
double single_pass_exposure(double w, const SensorParams& sp, const VehicleParams& vp, double half_length = 5000.0,
                            double dx = 0.25);

/// Largest lateral offset W whose single-pass detection probability
/// 1 - exp(-E(W)) reaches pass_threshold. A coarse outward scan brackets the
/// outermost crossing, which is then refined by bisection to `tol` meters.
/// Throws std::invalid_argument for a threshold outside (0, 1) and
/// std::runtime_error when no offset reaches it.
double effective_swath_halfwidth(const SensorParams& sp, const VehicleParams& vp, double pass_threshold,
                                 double tol = 1e-3);

/// Start pose of the survey: the configured start, or lead_in meters before
/// the domain's left edge at height W above its bottom edge, heading +x.
StartPose survey_start(const Scenario& s, double swath_halfwidth);

/// Lawnmower with `legs` legs parallel to x at the given spacing, semicircular
/// turns outside the domain and, when return_home is set, a return route
/// around the domain back to the start. Requires a rectangular domain and
/// spacing >= 2 * min turn radius.
LawnmowerPlan lawnmower_path(const Scenario& s, const StartPose& start, double spacing, std::size_t legs,
                             bool return_home);

/// Samples the path at a uniform step no larger than dt, ending exactly at the
/// path end. The rudder column holds the steady deflection r / K.
Trajectory sample_path(const LawnmowerPlan& plan, double dt, const VehicleParams& vp);

/// Adds legs until the residual risk on the growing path reaches beta, then
/// returns to the start. Throws std::invalid_argument when k > 1, the domain
/// is not an axis-aligned rectangle or spacing <= 0, and std::runtime_error
/// when max_legs legs do not reach beta.
BaselineResult plan_boustrophedon(const ValidatedScenario& s, const QmcPointSet& pts);

/// True when no point of any turn segment lies strictly inside the domain
/// (checked at 64 points per turn, 1 micrometer slack).
bool turns_outside(const LawnmowerPlan& plan, const Domain& d);

}  // namespace baseline

/// Geometric length over speed.
double path_time(const LawnmowerPlan& plan);

}  // namespace mcmplan
