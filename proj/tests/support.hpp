#pragma once

// Shared fixtures for the test binaries. The reference functions here are
// written directly from the model definitions with the C library only, so
// that library code is checked against an implementation it does not share.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/scenario.hpp"

namespace testing {

inline mcmplan::ScenarioConfig reference_config(double length_unit = 100.0, double beta = 0.05, std::size_t k = 1) {
  mcmplan::ScenarioConfig c;
  c.vertices = {mcmplan::Vec2{5, 5}, mcmplan::Vec2{25, 5}, mcmplan::Vec2{25, 25}, mcmplan::Vec2{5, 25}};
  c.length_unit = length_unit;
  c.vehicles = k;
  c.beta = beta;
  c.starts = {{5.1, 5.1, 0.0}};
  return c;
}

inline mcmplan::Scenario reference_scenario(double length_unit = 100.0, double beta = 0.05, std::size_t k = 1) {
  return *mcmplan::validate_scenario(reference_config(length_unit, beta, k));
}

// Independent detection-rate reference.
inline double ref_logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double ref_rate(double vx, double vy, double psi, double ox, double oy, const mcmplan::SensorParams& p) {
  const double dx = ox - vx;
  const double dy = oy - vy;
  const double r = std::fmax(std::sqrt(dx * dx + dy * dy), p.r_min);
  const double fwd = dx * std::cos(psi) + dy * std::sin(psi);
  const double lat = -dx * std::sin(psi) + dy * std::cos(psi);
  const double alpha = std::atan2(lat, fwd);
  const double tl = 20.0 * std::log10(r) + p.attenuation / 1000.0 * r;
  const double pd = 0.5 * std::erfc(-(p.fom - tl) / p.sigma / std::sqrt(2.0));
  const double fa = ref_logistic(p.p_alpha * (alpha + p.alpha_fov / 2)) + ref_logistic(p.p_alpha * (p.alpha_fov / 2 - alpha)) - 1.0;
  const double eps = std::atan(-p.height / r);
  const double u = eps - p.eps_de;
  const double fe = ref_logistic(p.p_eps * (u + p.eps_fov / 2)) + ref_logistic(p.p_eps * (p.eps_fov / 2 - u)) - 1.0;
  return p.lambda * pd * fa * fe;
}

// Trapezoid exposure of one trajectory at one point.
inline double ref_exposure(const mcmplan::Trajectory& t, double ox, double oy, const mcmplan::SensorParams& p) {
  if (t.states.size() < 2) return 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const auto& s = t.states[i];
    const double w = (i == 0 || i + 1 == t.states.size()) ? 0.5 : 1.0;
    e += w * ref_rate(s.x, s.y, s.psi, ox, oy, p);
  }
  return e * t.dt;
}

// Randomized smooth single-vehicle trajectory: piecewise-linear rudder with
// `nodes` random values simulated with the library integrator.
inline mcmplan::Trajectory random_trajectory(std::uint64_t seed, double t_final, double dt, mcmplan::VehicleState start,
                                             const mcmplan::VehicleParams& vp, std::size_t nodes = 12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  mcmplan::ControlSchedule c;
  for (std::size_t j = 0; j < nodes; ++j) {
    c.node_times.push_back(t_final * static_cast<double>(j) / static_cast<double>(nodes - 1));
    c.rudder.push_back(0.3 * vp.rudder_limit * u(rng));
  }
  return mcmplan::dynamics::simulate(start, c, dt, vp);
}

inline std::string temp_dir(const std::string& name) {
  return std::string(MCMPLAN_TEST_TMP) + "/" + name;
}

inline std::string data_path(const std::string& name) { return std::string(MCMPLAN_TEST_DATA) + "/" + name; }

}  // namespace testing
