#include "mcmplan/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mcmplan {
namespace {

std::string join(const std::vector<std::string>& items) {
  std::ostringstream os;
  os << "invalid scenario";
  for (const auto& s : items) os << "\n  - " << s;
  return os.str();
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Lawnmower: return "lawnmower";
    case InitStrategy::Spiral: return "spiral";
    case InitStrategy::Random: return "random";
  }
  return "lawnmower";
}

std::string to_string(Containment c) { return c == Containment::Off ? "off" : "penalty"; }

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ValidatedScenario validate_scenario(const Scenario& s) {
  std::vector<std::string> errs;
  const auto need = [&errs](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };

  const Domain& d = s.domain;
  bool finite = true;
  for (const auto& v : d.vertices) finite = finite && std::isfinite(v.x) && std::isfinite(v.y);
  need(finite, "domain: vertices must be finite");
  bool coincident = false;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) coincident = coincident || d.vertices[i] == d.vertices[j];
  }
  if (finite) {
    if (coincident || signed_area(d) == 0.0) {
      errs.push_back("domain: degenerate domain (zero area or coincident vertices)");
    } else if (signed_area(d) < 0.0) {
      errs.push_back("domain: vertices must be in counter-clockwise order");
    } else if (!is_convex(d)) {
      errs.push_back("domain: quadrilateral must be convex");
    }
  }

  const SensorParams& p = s.sensor;
  need(finite_positive(p.lambda), "sensor: lambda must be positive");
  need(std::isfinite(p.fom), "sensor: fom must be finite");
  need(std::isfinite(p.attenuation) && p.attenuation >= 0.0, "sensor: attenuation must be non-negative");
  need(finite_positive(p.sigma), "sensor: sigma must be positive");
  need(finite_positive(p.alpha_fov) && p.alpha_fov < 2.0 * std::numbers::pi,
       "sensor: alpha_fov must lie in (0, 360) degrees");
  need(finite_positive(p.eps_fov), "sensor: eps_fov must be positive");
  need(std::isfinite(p.eps_de) && std::abs(p.eps_de) < 0.5 * std::numbers::pi,
       "sensor: eps_de must lie in (-90, 90) degrees");
  need(finite_positive(p.p_alpha), "sensor: p_alpha must be positive");
  need(finite_positive(p.p_eps), "sensor: p_eps must be positive");
  need(finite_positive(p.height), "sensor: height must be positive");
  need(finite_positive(p.r_min), "sensor: r_min must be positive");

  const VehicleParams& v = s.vehicle;
  need(finite_positive(v.speed), "vehicle: speed must be positive");
  need(finite_positive(v.gain), "vehicle: gain must be positive");
  need(finite_positive(v.time_constant), "vehicle: time_constant must be positive");
  need(finite_positive(v.rudder_limit) && v.rudder_limit <= 0.5 * std::numbers::pi,
       "solver: d_max must lie in (0, 90] degrees");

  need(s.k >= 1, "mission: vehicle count must be at least 1");
  need(std::isfinite(s.beta) && s.beta > 0.0 && s.beta <= 1.0,
       "mission: beta must lie in (0, 1]; the residual risk is strictly positive, so beta = 0 is not attainable");
  need(s.starts.size() == s.k, "mission: need exactly one start pose per vehicle");
  for (std::size_t i = 0; i < s.starts.size(); ++i) {
    const auto& st = s.starts[i];
    const bool ok = std::isfinite(st.x) && std::isfinite(st.y) && std::isfinite(st.psi);
    if (!ok) {
      errs.push_back("mission: start " + std::to_string(i) + " is not finite");
    } else if (finite && !coincident && !contains(d, {st.x, st.y}, 1e-9 * (1.0 + std::abs(st.x) + std::abs(st.y)))) {
      errs.push_back("mission: start " + std::to_string(i) + " lies outside the domain");
    }
  }

  need(s.qmc.points >= 16, "qmc: points must be at least 16");
  need(s.qmc.shifts >= 1, "qmc: shifts must be at least 1");

  const TranscriptionConfig& c = s.solver;
  need(c.n_nodes >= 4, "solver: nodes must be at least 4");
  need(finite_positive(c.dt_sim), "solver: dt_sim must be positive");
  need(finite_positive(c.sample_dt) && c.sample_dt >= c.dt_sim, "solver: sample_dt must be at least dt_sim");
  need(finite_positive(c.risk_tol), "solver: risk_tol must be positive");
  need(finite_positive(c.pos_tol), "solver: pos_tol must be positive");
  need(c.max_outer >= 1, "solver: max_outer must be at least 1");
  need(c.max_inner >= 1, "solver: max_inner must be at least 1");
  need(finite_positive(c.penalty_init), "solver: penalty_init must be positive");
  need(std::isfinite(c.penalty_growth) && c.penalty_growth > 1.0, "solver: penalty_growth must exceed 1");
  need(c.n_starts >= 1, "solver: n_starts must be at least 1");
  need(std::isfinite(c.containment_weight) && c.containment_weight >= 0.0,
       "solver: containment_weight must be non-negative");
  need(finite_positive(c.t_min), "solver: t_min must be positive");
  need(std::isfinite(c.t_max) && c.t_max > c.t_min, "solver: t_max must exceed t_min");

  const BaselineOptions& b = s.baseline;
  need(std::isfinite(b.pass_threshold) && b.pass_threshold > 0.0 && b.pass_threshold < 1.0,
       "baseline: pass_threshold must lie in (0, 1)");
  need(finite_positive(b.overlap), "baseline: overlap must be positive");
  need(!b.spacing || finite_positive(*b.spacing), "baseline: spacing must be positive");
  need(std::isfinite(b.lead_in) && b.lead_in >= 0.0, "baseline: lead_in must be non-negative");
  need(b.max_legs >= 1, "baseline: max_legs must be at least 1");
  need(finite_positive(b.dt), "baseline: dt must be positive");

  if (!errs.empty()) throw ScenarioError(std::move(errs));
  return ValidatedScenario(s);
}

Scenario to_si(const ScenarioConfig& c) {
  Scenario s;
  const double u = c.length_unit;
  for (std::size_t i = 0; i < 4; ++i) s.domain.vertices[i] = u * c.vertices[i];

  s.sensor.lambda = c.lambda;
  s.sensor.fom = c.fom;
  s.sensor.attenuation = c.attenuation;
  s.sensor.sigma = c.sigma;
  s.sensor.alpha_fov = deg_to_rad(c.alpha_fov_deg);
  s.sensor.eps_fov = deg_to_rad(c.eps_fov_deg);
  s.sensor.eps_de = deg_to_rad(c.eps_de_deg);
  s.sensor.p_alpha = c.p_alpha;
  s.sensor.p_eps = c.p_eps;
  s.sensor.height = c.height;
  s.sensor.r_min = c.r_min;

  s.vehicle.speed = c.speed;
  s.vehicle.gain = c.gain;
  s.vehicle.time_constant = c.time_constant;
  s.vehicle.rudder_limit = deg_to_rad(c.d_max_deg);

  s.k = c.vehicles;
  s.beta = c.beta;
  s.risk_mode = c.risk_mode;
  if (c.starts.size() == 1) {
    const auto& st = c.starts.front();
    s.starts.assign(c.vehicles, StartPose{u * st.x, u * st.y, deg_to_rad(st.heading_deg)});
  } else {
    for (const auto& st : c.starts) s.starts.push_back({u * st.x, u * st.y, deg_to_rad(st.heading_deg)});
  }

  s.qmc = c.qmc;
  s.solver = c.solver;
  s.baseline = c.baseline;
  if (s.baseline.start) *s.baseline.start = u * *s.baseline.start;
  return s;
}

ValidatedScenario validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> errs;
  if (!(std::isfinite(c.length_unit) && c.length_unit > 0.0)) errs.push_back("domain: length_unit_m must be positive");
  if (c.starts.empty()) errs.push_back("mission: at least one start pose is required");
  if (!errs.empty()) throw ScenarioError(std::move(errs));
  return validate_scenario(to_si(c));
}

Scenario with_vehicle_count(const Scenario& s, std::size_t k) {
  Scenario out = s;
  out.k = k;
  out.starts.assign(k, s.starts.front());
  return out;
}

}  // namespace mcmplan
