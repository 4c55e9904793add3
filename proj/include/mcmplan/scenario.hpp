#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/geometry.hpp"
#include "mcmplan/risk.hpp"
#include "mcmplan/sensor.hpp"

namespace mcmplan {

enum class InitStrategy { Lawnmower, Spiral, Random };
enum class Containment { Off, Penalty };

std::string to_string(InitStrategy s);
std::string to_string(Containment c);

/// Direct-transcription and optimizer settings (SI units).
struct TranscriptionConfig {
  std::size_t n_nodes = 60;
  double dt_sim = 0.1;        // upper bound on the integration step, s
  double sample_dt = 1.0;     // upper bound on the exposure sampling interval, s
  double risk_tol = 1e-3;
  double pos_tol = 0.5;       // m
  std::size_t max_outer = 8;
  std::size_t max_inner = 60;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  InitStrategy init_strategy = InitStrategy::Lawnmower;
  std::size_t n_starts = 1;
  std::size_t inner_shifts = 2;  // qMC shifts used by the inner minimization; 0 = all
  Containment containment = Containment::Penalty;
  double containment_weight = 0.0;
  double t_min = 0.1;         // s
  double t_max = 50000.0;     // s
};

struct QmcConfig {
  std::size_t points = 4096;
  std::size_t shifts = 8;
  std::uint64_t seed = 1;
};

struct BaselineOptions {
  double pass_threshold = 0.9;
  double overlap = 0.85;
  std::optional<double> spacing;  // m; empty = 2 W overlap
  std::optional<Vec2> start;      // m; empty = lead-in before the first leg
  double lead_in = 100.0;         // m
  std::size_t max_legs = 200;
  double dt = 0.5;                // trajectory sampling step, s
};

struct StartPose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  friend bool operator==(const StartPose&, const StartPose&) = default;
};

/// A scenario as written in a scenario file: angles in degrees, attenuation
/// in dB/km, positions in domain units of `length_unit` meters.
struct ScenarioConfig {
  std::array<Vec2, 4> vertices{};
  double length_unit = 1.0;

  double lambda = 20.0;
  double fom = 72.0;
  double attenuation = 5.2;
  double sigma = 9.0;
  double alpha_fov_deg = 120.0;
  double eps_fov_deg = 5.0;
  double eps_de_deg = -6.0;
  double p_alpha = 25.0;
  double p_eps = 400.0;
  double height = 20.0;
  double r_min = 0.1;

  double speed = 2.5;
  double gain = 5.0;
  double time_constant = 0.5;

  std::size_t vehicles = 1;
  double beta = 0.05;
  RiskMode risk_mode = RiskMode::PaperSum;
  struct Start {
    double x, y, heading_deg;
  };
  std::vector<Start> starts;  // one entry is shared by all vehicles

  QmcConfig qmc;

  TranscriptionConfig solver;
  double d_max_deg = 35.0;

  BaselineOptions baseline;  // start in domain units, everything else in meters
};

/// Validated scenario in SI units (radians, meters, seconds).
struct Scenario {
  Domain domain;
  SensorParams sensor;
  VehicleParams vehicle;
  std::size_t k = 1;
  double beta = 0.05;
  std::vector<StartPose> starts;
  QmcConfig qmc;
  RiskMode risk_mode = RiskMode::PaperSum;
  TranscriptionConfig solver;
  BaselineOptions baseline;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// A Scenario whose invariants have been checked. Only validate_scenario
/// creates one.
class ValidatedScenario {
 public:
  const Scenario& operator*() const { return s_; }
  const Scenario* operator->() const { return &s_; }
  const Scenario& get() const { return s_; }

 private:
  explicit ValidatedScenario(Scenario s) : s_(std::move(s)) {}
  Scenario s_;
  friend ValidatedScenario validate_scenario(const Scenario& s);
};

/// Checks every invariant and collects all failures into one ScenarioError.
/// Validating an already validated scenario returns it unchanged.
ValidatedScenario validate_scenario(const Scenario& s);

/// Unit conversion followed by validation.
ValidatedScenario validate_scenario(const ScenarioConfig& c);

/// Converts file units to SI without checking invariants.
Scenario to_si(const ScenarioConfig& c);

/// Copy of the scenario with k vehicles all starting at the first start pose.
Scenario with_vehicle_count(const Scenario& s, std::size_t k);

/// Parses a scenario document. Unknown keys, missing required sections and
/// wrong value types are reported as ScenarioError.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& c);

}  // namespace mcmplan
