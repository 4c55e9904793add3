#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcmplan/geometry.hpp"
#include "mcmplan/state.hpp"

namespace mcmplan {

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Forward-looking sonar parameters. Angles are radians, lengths meters.
/// Defaults are the reference survey configuration.
struct SensorParams {
  double lambda = 20.0;             // Poisson scan rate, 1/s
  double fom = 72.0;                // figure of merit, dB
  double attenuation = 5.2;         // absorption, dB/km
  double sigma = 9.0;               // detection spread, dB
  double alpha_fov = deg_to_rad(120.0);
  double eps_fov = deg_to_rad(5.0);
  double eps_de = deg_to_rad(-6.0);  // negative: below horizontal
  double p_alpha = 25.0;
  double p_eps = 400.0;
  double height = 20.0;             // above seabed, m
  double r_min = 0.1;               // range clamp, m
};

namespace sensor {

/// 20 log10(r) + (a / 1000) r, with a in dB/km and r in meters.
/// Throws std::domain_error for r <= 0.
double transmission_loss(double range, const SensorParams& p);

/// Phi((FOM - TL(r)) / sigma) with r clamped to r_min.
double detection_probability(double range, const SensorParams& p);

/// Target offset rotated into the vehicle frame: (forward, lateral-to-port).
Vec2 body_frame_offsets(const VehicleState& state, Vec2 omega);

/// Body-frame bearing in (-pi, pi]; 0 dead ahead, positive toward port.
/// A target coincident with the vehicle has bearing 0.
double bearing(const VehicleState& state, Vec2 omega);

double horizontal_gate(double alpha_b, const SensorParams& p);

/// atan(-h / range), range clamped to r_min.
double depression(const VehicleState& state, Vec2 omega, const SensorParams& p);

double vertical_gate(double eps_b, const SensorParams& p);

/// gamma = lambda * p * F_alpha * F_eps, in 1/s.
double detection_rate(const VehicleState& state, Vec2 omega, const SensorParams& p);

/// Logistic function, evaluated without overflow for any argument.
inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Two-sided sigmoid window centred on 0 with full width `width` and slope
/// `slope`: logistic(slope (w/2 + u)) + logistic(slope (w/2 - u)) - 1,
/// evaluated as (1 - exp(-slope w)) * logistic(slope (w/2 + u)) *
/// logistic(slope (w/2 - u)), which is exact and strictly positive.
struct Window {
  double value;
  double derivative;  // d value / du
};
inline Window sigmoid_window(double u, double slope, double width) {
  const double half = 0.5 * width;
  const double lo = logistic(slope * (half + u));
  const double hi = logistic(slope * (half - u));
  const double value = -std::expm1(-slope * width) * lo * hi;
  return {value, value * slope * (hi - lo)};
}

}  // namespace sensor

/// Detection rate evaluator with per-parameter constants hoisted. This is the
/// inner loop of every exposure integral; it agrees with
/// sensor::detection_rate to rounding and, on request, also returns the
/// partial derivatives with respect to the vehicle pose.
class DetectionModel {
 public:
  explicit DetectionModel(const SensorParams& p)
      : p_(p),
        tl_log_scale_(20.0 / std::numbers::ln10),
        absorption_per_m_(p.attenuation / 1000.0),
        inv_sigma_(1.0 / p.sigma) {}

  const SensorParams& params() const { return p_; }

  struct Partials {
    double rate;
    double d_x;
    double d_y;
    double d_psi;
  };

  /// (dx, dy) = omega - vehicle position; (c, s) = (cos psi, sin psi).
  double rate(double dx, double dy, double c, double s) const {
    const double range = std::max(std::sqrt(dx * dx + dy * dy), p_.r_min);
    const double forward = dx * c + dy * s;
    const double lateral = -dx * s + dy * c;
    const double alpha = (forward == 0.0 && lateral == 0.0) ? 0.0 : std::atan2(lateral, forward);
    const double z = (p_.fom - tl_log_scale_ * std::log(range) - absorption_per_m_ * range) * inv_sigma_;
    const double pd = 0.5 * std::erfc(-z * std::numbers::sqrt2 * 0.5);
    const double eps = -std::atan(p_.height / range);
    const double fa = sensor::sigmoid_window(alpha, p_.p_alpha, p_.alpha_fov).value;
    const double fe = sensor::sigmoid_window(eps - p_.eps_de, p_.p_eps, p_.eps_fov).value;
    return p_.lambda * pd * fa * fe;
  }

  Partials rate_and_partials(double dx, double dy, double c, double s) const {
    const double raw = std::sqrt(dx * dx + dy * dy);
    const bool clamped = raw < p_.r_min;
    const double range = clamped ? p_.r_min : raw;
    const double forward = dx * c + dy * s;
    const double lateral = -dx * s + dy * c;
    const double alpha = (forward == 0.0 && lateral == 0.0) ? 0.0 : std::atan2(lateral, forward);

    const double z = (p_.fom - tl_log_scale_ * std::log(range) - absorption_per_m_ * range) * inv_sigma_;
    const double pd = 0.5 * std::erfc(-z * std::numbers::sqrt2 * 0.5);
    const double density = std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    const double dpd_drange = -density * inv_sigma_ * (tl_log_scale_ / range + absorption_per_m_);

    const double h = p_.height;
    const double eps = -std::atan(h / range);
    const double deps_drange = h / (range * range + h * h);

    const auto fa = sensor::sigmoid_window(alpha, p_.p_alpha, p_.alpha_fov);
    const auto fe = sensor::sigmoid_window(eps - p_.eps_de, p_.p_eps, p_.eps_fov);

    const double rate = p_.lambda * pd * fa.value * fe.value;
    const double drate_drange =
        clamped ? 0.0 : p_.lambda * fa.value * (dpd_drange * fe.value + pd * fe.derivative * deps_drange);
    const double drate_dalpha = p_.lambda * pd * fe.value * fa.derivative;

    // range = |omega - pos|, alpha = atan2(omega - pos) - psi.
    const double inv_r = 1.0 / range;
    const double inv_r2 = inv_r * inv_r;
    Partials out;
    out.rate = rate;
    out.d_x = -drate_drange * dx * inv_r + drate_dalpha * dy * inv_r2;
    out.d_y = -drate_drange * dy * inv_r - drate_dalpha * dx * inv_r2;
    out.d_psi = -drate_dalpha;
    return out;
  }

 private:
  SensorParams p_;
  double tl_log_scale_;
  double absorption_per_m_;
  double inv_sigma_;
};

}  // namespace mcmplan
