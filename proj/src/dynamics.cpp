#include "mcmplan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcmplan {

double ControlSchedule::at(double t) const {
  if (node_times.empty()) return 0.0;
  if (t <= node_times.front()) return rudder.front();
  if (t >= node_times.back()) return rudder.back();
  const auto it = std::upper_bound(node_times.begin(), node_times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - node_times.begin());
  const double t0 = node_times[j - 1];
  const double t1 = node_times[j];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * rudder[j - 1] + w * rudder[j];
}

namespace dynamics {

StateRate state_derivative(const VehicleState& s, double rudder, const VehicleParams& p) {
  return {p.speed * std::cos(s.psi), p.speed * std::sin(s.psi), s.r,
          (p.gain * rudder - s.r) / p.time_constant};
}

Trajectory simulate(const VehicleState& start, const ControlSchedule& c, double dt, const VehicleParams& p) {
  if (c.node_times.size() < 2 || c.node_times.size() != c.rudder.size()) {
    throw std::invalid_argument("simulate: schedule needs at least two nodes with one rudder value each");
  }
  if (c.node_times.front() != 0.0) {
    throw std::invalid_argument("simulate: schedule must start at t = 0");
  }
  for (std::size_t j = 1; j < c.node_times.size(); ++j) {
    if (!(c.node_times[j] > c.node_times[j - 1])) {
      throw std::invalid_argument("simulate: node times must be strictly increasing");
    }
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("simulate: dt must be positive");
  }

  const double tf = c.final_time();
  const auto steps = static_cast<std::size_t>(std::floor(tf / dt * (1.0 + 1e-9)));
  const auto rudder_at = [&c](double t) { return c.at(t); };

  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steps + 1);
  traj.rudder.reserve(steps + 1);
  traj.states.push_back(start);
  traj.rudder.push_back(c.at(0.0));
  VehicleState s = start;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    s = rk4_step(s, rudder_at, t, dt, p);
    traj.states.push_back(s);
    traj.rudder.push_back(c.at(static_cast<double>(i + 1) * dt));
  }
  return traj;
}

double analytic_turn_rate(double t, double d0, const VehicleParams& p) {
  return -p.gain * d0 * std::expm1(-t / p.time_constant);
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

double arc_length(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const auto& a = traj.states[i - 1];
    const auto& b = traj.states[i];
    const double chord = std::hypot(b.x - a.x, b.y - a.y);
    const double half_turn = 0.5 * std::abs(b.psi - a.psi);
    total += half_turn > 1e-8 ? chord * half_turn / std::sin(half_turn) : chord;
  }
  return total;
}

Trajectory decimate(const Trajectory& traj, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("decimate: stride must be positive");
  if (traj.states.empty() || stride == 1) return traj;
  if ((traj.states.size() - 1) % stride != 0) {
    throw std::invalid_argument("decimate: stride must divide the number of steps");
  }
  Trajectory out;
  out.dt = traj.dt * static_cast<double>(stride);
  for (std::size_t i = 0; i < traj.states.size(); i += stride) {
    out.states.push_back(traj.states[i]);
    out.rudder.push_back(traj.rudder.empty() ? 0.0 : traj.rudder[i]);
  }
  return out;
}

}  // namespace dynamics
}  // namespace mcmplan
