#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "mcmplan/state.hpp"

namespace mcmplan {

/// Constant-speed vehicle with first-order Nomoto steering.
struct VehicleParams {
  double speed = 2.5;          // V, m/s
  double gain = 5.0;           // K, 1/s
  double time_constant = 0.5;  // T, s
  double rudder_limit = 35.0 * std::numbers::pi / 180.0;  // d_max, rad

  /// Radius of a steady turn at full rudder, V / (K d_max).
  double min_turn_radius() const { return speed / (gain * rudder_limit); }
};

/// Piecewise-linear rudder schedule over [0, T_F].
struct ControlSchedule {
  std::vector<double> node_times;  // strictly increasing, starts at 0
  std::vector<double> rudder;      // rad, one per node

  double final_time() const { return node_times.empty() ? 0.0 : node_times.back(); }
  double at(double t) const;
};

/// Uniformly sampled state history; states[i] is at time i * dt.
struct Trajectory {
  double dt = 0.0;
  std::vector<VehicleState> states;
  std::vector<double> rudder;  // commanded deflection at each sample

  double final_time() const { return states.size() < 2 ? 0.0 : dt * static_cast<double>(states.size() - 1); }
  bool empty() const { return states.empty(); }
};

struct StateRate {
  double dx, dy, dpsi, dr;
};

namespace dynamics {

/// (V cos psi, V sin psi, r, (K d - r) / T).
StateRate state_derivative(const VehicleState& s, double rudder, const VehicleParams& p);

/// One classical fourth-order Runge-Kutta step of length dt from time t.
template <class RudderFn>
VehicleState rk4_step(const VehicleState& s, RudderFn&& rudder_of_t, double t, double dt,
                      const VehicleParams& p) {
  const auto advance = [&](const StateRate& k, double h) {
    return VehicleState{s.x + h * k.dx, s.y + h * k.dy, s.psi + h * k.dpsi, s.r + h * k.dr};
  };
  const double d_mid = rudder_of_t(t + 0.5 * dt);
  const StateRate k1 = state_derivative(s, rudder_of_t(t), p);
  const StateRate k2 = state_derivative(advance(k1, 0.5 * dt), d_mid, p);
  const StateRate k3 = state_derivative(advance(k2, 0.5 * dt), d_mid, p);
  const StateRate k4 = state_derivative(advance(k3, dt), rudder_of_t(t + dt), p);
  const double w = dt / 6.0;
  return VehicleState{s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
                      s.y + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
                      s.psi + w * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi),
                      s.r + w * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr)};
}

/// Integrates the schedule from `start` with fixed step dt. Produces
/// floor(T_F / dt) + 1 samples (a relative slack of 1e-9 absorbs rounding).
/// Throws std::invalid_argument for an empty or malformed schedule or dt <= 0.
Trajectory simulate(const VehicleState& start, const ControlSchedule& c, double dt, const VehicleParams& p);

/// K d0 (1 - exp(-t / T)): turn rate under constant rudder from r(0) = 0.
double analytic_turn_rate(double t, double d0, const VehicleParams& p);

/// Wraps to (-pi, pi].
double wrap_angle(double a);

/// Path length of the sampled trajectory. Each step is measured as the
/// circular arc through its endpoints with the sampled heading change, which
/// is exact for piecewise-constant curvature.
double arc_length(const Trajectory& traj);

/// Keeps every `stride`-th sample (and requires the last sample to be kept).
Trajectory decimate(const Trajectory& traj, std::size_t stride);

}  // namespace dynamics
}  // namespace mcmplan
