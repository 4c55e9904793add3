#include "mcmplan/exposure_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace mcmplan::kernel {
namespace {

struct Constants {
  double lambda, fom, absorption, inv_sigma, tl_log_scale;
  double height, r_min;
  double p_alpha, half_alpha, scale_alpha;
  double p_eps, half_eps, scale_eps, eps_de;

  explicit Constants(const SensorParams& sp)
      : lambda(sp.lambda),
        fom(sp.fom),
        absorption(sp.attenuation / 1000.0),
        inv_sigma(1.0 / sp.sigma),
        tl_log_scale(20.0 / std::numbers::ln10),
        height(sp.height),
        r_min(sp.r_min),
        p_alpha(sp.p_alpha),
        half_alpha(0.5 * sp.alpha_fov),
        scale_alpha(-std::expm1(-sp.p_alpha * sp.alpha_fov)),
        p_eps(sp.p_eps),
        half_eps(0.5 * sp.eps_fov),
        scale_eps(-std::expm1(-sp.p_eps * sp.eps_fov)),
        eps_de(sp.eps_de) {}
};

constexpr double kMaxExp = 700.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(std::min(-z, kMaxExp))); }

}  // namespace

void accumulate_rates(const SensorParams& sp, const double* __restrict px, const double* __restrict py, std::size_t n, Pose pose,
                      double weight, double* __restrict exposure) {
  const Constants k(sp);
  const double x = pose.x;
  const double y = pose.y;
  const double c = pose.cos_psi;
  const double s = pose.sin_psi;
  const double scale = weight * k.lambda * k.scale_alpha * k.scale_eps;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px[i] - x;
    const double dy = py[i] - y;
    const double range = std::max(std::sqrt(dx * dx + dy * dy), k.r_min);
    const double forward = dx * c + dy * s;
    const double lateral = dy * c - dx * s;
    const double alpha = std::atan2(lateral, forward);
    const double z = (k.fom - k.tl_log_scale * std::log(range) - k.absorption * range) * k.inv_sigma;
    const double pd = 0.5 * std::erfc(-z * kInvSqrt2);
    const double u = -std::atan(k.height / range) - k.eps_de;
    const double fa = logistic(k.p_alpha * (k.half_alpha + alpha)) * logistic(k.p_alpha * (k.half_alpha - alpha));
    const double fe = logistic(k.p_eps * (k.half_eps + u)) * logistic(k.p_eps * (k.half_eps - u));
    exposure[i] += scale * pd * fa * fe;
  }
}

void evaluate_rates(const SensorParams& sp, const double* __restrict px, const double* __restrict py, std::size_t n, Pose pose,
                    double* rates) {
  std::fill(rates, rates + n, 0.0);
  accumulate_rates(sp, px, py, n, pose, 1.0, rates);
}

PoseGradient weighted_rate_gradient(const SensorParams& sp, const double* __restrict px, const double* __restrict py,
                                    const double* coeff, std::size_t n, Pose pose) {
  const Constants k(sp);
  const double x = pose.x;
  const double y = pose.y;
  const double c = pose.cos_psi;
  const double s = pose.sin_psi;
  const double scale = k.lambda * k.scale_alpha * k.scale_eps;
  double gx = 0.0;
  double gy = 0.0;
  double gpsi = 0.0;
#pragma omp simd reduction(+ : gx, gy, gpsi)
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px[i] - x;
    const double dy = py[i] - y;
    const double raw = std::sqrt(dx * dx + dy * dy);
    const bool clamped = raw < k.r_min;
    const double range = clamped ? k.r_min : raw;
    const double forward = dx * c + dy * s;
    const double lateral = dy * c - dx * s;
    const double alpha = std::atan2(lateral, forward);

    const double z = (k.fom - k.tl_log_scale * std::log(range) - k.absorption * range) * k.inv_sigma;
    const double pd = 0.5 * std::erfc(-z * kInvSqrt2);
    const double inv_r = 1.0 / range;
    const double dpd_dr = -kInvSqrt2Pi * std::exp(-0.5 * z * z) * k.inv_sigma * (k.tl_log_scale * inv_r + k.absorption);

    const double u = -std::atan(k.height / range) - k.eps_de;
    const double du_dr = k.height / (range * range + k.height * k.height);

    const double la = logistic(k.p_alpha * (k.half_alpha + alpha));
    const double ha = logistic(k.p_alpha * (k.half_alpha - alpha));
    const double le = logistic(k.p_eps * (k.half_eps + u));
    const double he = logistic(k.p_eps * (k.half_eps - u));
    const double fa = la * ha;
    const double fe = le * he;
    const double dfa = fa * k.p_alpha * (ha - la);
    const double dfe = fe * k.p_eps * (he - le);

    const double w = coeff[i] * scale;
    const double d_range = clamped ? 0.0 : w * fa * (dpd_dr * fe + pd * dfe * du_dr);
    const double d_alpha = w * pd * fe * dfa;
    gx += -d_range * dx * inv_r + d_alpha * dy * inv_r * inv_r;
    gy += -d_range * dy * inv_r - d_alpha * dx * inv_r * inv_r;
    gpsi += -d_alpha;
  }
  return {gx, gy, gpsi};
}

}  // namespace mcmplan::kernel
