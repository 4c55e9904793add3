#include "mcmplan/sensor.hpp"

#include <stdexcept>

namespace mcmplan::sensor {

double transmission_loss(double range, const SensorParams& p) {
  if (!(range > 0.0)) {
    throw std::domain_error("transmission_loss: range must be positive");
  }
  return 20.0 * std::log10(range) + p.attenuation / 1000.0 * range;
}

double detection_probability(double range, const SensorParams& p) {
  const double r = std::max(range, p.r_min);
  const double z = (p.fom - transmission_loss(r, p)) / p.sigma;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

Vec2 body_frame_offsets(const VehicleState& state, Vec2 omega) {
  const double dx = omega.x - state.x;
  const double dy = omega.y - state.y;
  const double c = std::cos(state.psi);
  const double s = std::sin(state.psi);
  return {dx * c + dy * s, -dx * s + dy * c};
}

double bearing(const VehicleState& state, Vec2 omega) {
  const Vec2 b = body_frame_offsets(state, omega);
  if (b.x == 0.0 && b.y == 0.0) return 0.0;
  return std::atan2(b.y, b.x);
}

double horizontal_gate(double alpha_b, const SensorParams& p) {
  return sigmoid_window(alpha_b, p.p_alpha, p.alpha_fov).value;
}

double depression(const VehicleState& state, Vec2 omega, const SensorParams& p) {
  const double range = std::max(std::hypot(omega.x - state.x, omega.y - state.y), p.r_min);
  return std::atan(-p.height / range);
}

double vertical_gate(double eps_b, const SensorParams& p) {
  return sigmoid_window(eps_b - p.eps_de, p.p_eps, p.eps_fov).value;
}

double detection_rate(const VehicleState& state, Vec2 omega, const SensorParams& p) {
  const double range = std::hypot(omega.x - state.x, omega.y - state.y);
  return p.lambda * detection_probability(range, p) * horizontal_gate(bearing(state, omega), p) *
         vertical_gate(depression(state, omega, p), p);
}

}  // namespace mcmplan::sensor
