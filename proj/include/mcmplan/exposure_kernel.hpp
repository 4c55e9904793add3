#pragma once

#include <cstddef>

#include "mcmplan/sensor.hpp"

// Vectorized detection-rate loops over structure-of-arrays point sets. These
// are the hot loops of every risk evaluation; they are compiled separately
// with relaxed floating-point semantics so that the transcendental calls map
// onto the SIMD math library. They agree with sensor::detection_rate to a few
// ulp.
namespace mcmplan::kernel {

struct Pose {
  double x;
  double y;
  double cos_psi;
  double sin_psi;
};

struct PoseGradient {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

/// exposure[i] += weight * gamma(pose, (px[i], py[i])) for i < n.
void accumulate_rates(const SensorParams& sp, const double* px, const double* py, std::size_t n, Pose pose,
                      double weight, double* exposure);

/// rates[i] = gamma(pose, (px[i], py[i])) for i < n.
void evaluate_rates(const SensorParams& sp, const double* px, const double* py, std::size_t n, Pose pose,
                    double* rates);

/// Sum over i of coeff[i] * d gamma(pose, point i) / d pose.
PoseGradient weighted_rate_gradient(const SensorParams& sp, const double* px, const double* py,
                                    const double* coeff, std::size_t n, Pose pose);

}  // namespace mcmplan::kernel
