#pragma once

namespace mcmplan {

/// Planar vehicle state: position (m), heading (rad, unwrapped while
/// integrating), turn rate (rad/s).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double r = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

}  // namespace mcmplan
