#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/qmc.hpp"
#include "mcmplan/risk.hpp"
#include "mcmplan/scenario.hpp"

namespace mcmplan {

/// Free final time and k * n_nodes rudder values (vehicle-major) on the
/// normalized grid s_j = j / (n_nodes - 1), t = s T_F.
struct DecisionVector {
  double t_final = 0.0;
  std::vector<double> rudder;

  double& node(std::size_t vehicle, std::size_t j, std::size_t n_nodes) { return rudder[vehicle * n_nodes + j]; }
  friend bool operator==(const DecisionVector&, const DecisionVector&) = default;
};

struct ConstraintValues {
  double risk = 1.0;
  double risk_violation = 0.0;             // max(0, risk - beta)
  std::vector<double> terminal_distance;   // |pos_n(T_F) - start_n|, m
  std::vector<double> terminal_violation;  // max(0, terminal_distance - pos_tol), m
  double containment_penalty = 0.0;        // integral of squared distance outside, m^2 s

  bool feasible(double beta, const TranscriptionConfig& c) const;
};

struct SolveResult {
  double t_final = 0.0;
  DecisionVector decision;
  std::vector<ControlSchedule> schedules;
  std::vector<Trajectory> trajectories;  // at the exposure sampling interval
  RiskEstimate risk;                     // in the scenario's risk mode
  double risk_paper_sum = 0.0;
  double risk_joint = 0.0;
  ConstraintValues constraints;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::size_t evaluations = 0;
  bool feasible = false;
  bool converged = false;
  std::vector<double> objective_history;  // best feasible T_F after each outer iteration
  std::string init_strategy;
};

namespace solver {

/// Integration and exposure sampling grid for one horizon: `samples`
/// exposure intervals of `stride` RK4 steps each.
struct Grid {
  std::size_t samples = 1;
  std::size_t stride = 1;
  std::size_t steps() const { return samples * stride; }
};

/// Smallest grid with sampling interval <= sample_dt and integration step
/// <= dt_sim whose sample count is a multiple of n_nodes - 1.
Grid make_grid(double t_final, const TranscriptionConfig& c);

/// Augmented-Lagrangian state. The risk constraint is scaled by
/// kRiskScale and the terminal equalities by 1% of sqrt(area).
struct AlState {
  double lambda_risk = 0.0;
  std::vector<double> lambda_terminal;  // 2 per vehicle
  double mu = 10.0;
  double t_ref = 1.0;  // penalty terms are multiplied by this time scale
};

constexpr double kRiskScale = 0.01;

class Transcription {
 public:
  Transcription(const Scenario& s, const QmcPointSet& pts, Grid grid);

  const Grid& grid() const { return grid_; }
  std::size_t vehicles() const { return s_.k; }
  std::size_t nodes() const { return s_.solver.n_nodes; }
  double terminal_scale() const { return terminal_scale_; }

  /// States at every integration step for each vehicle.
  std::vector<Trajectory> integrate(const DecisionVector& dv) const;

  /// States at the exposure samples (every stride-th step).
  std::vector<Trajectory> sampled(const DecisionVector& dv) const;

  ConstraintValues constraints(const DecisionVector& dv, RiskEstimate* risk = nullptr) const;

  /// T_F + t_ref * (risk and terminal penalty terms) + containment term.
  /// When grad is non-null it receives d merit / d(T_F, rudder...) computed
  /// by reverse-mode differentiation of the discrete map.
  double merit(const DecisionVector& dv, const AlState& al, std::vector<double>* grad = nullptr,
               ConstraintValues* cv = nullptr, RiskEstimate* risk = nullptr) const;

  /// Terminal position offsets and their Jacobian with respect to the
  /// rudder nodes of one vehicle (row 0: x, row 1: y).
  void terminal_jacobian(const DecisionVector& dv, std::size_t vehicle, Vec2& offset, std::vector<double>& jx,
                         std::vector<double>& jy) const;

 private:
  void forward(const DecisionVector& dv, std::size_t v, std::vector<VehicleState>& z) const;
  void adjoint(const DecisionVector& dv, std::size_t v, const std::vector<VehicleState>& z,
               const std::vector<VehicleState>& injections, VehicleState terminal_seed, double& tf_bar,
               double* rudder_bar) const;

  const Scenario& s_;
  const QmcPointSet& pts_;
  Grid grid_;
  double terminal_scale_;
};

/// k trajectories at full integration resolution on make_grid(T_F).
std::vector<Trajectory> transcribe(const DecisionVector& dv, const Scenario& s);

/// Constraint values on make_grid(T_F) with the scenario's point set.
ConstraintValues evaluate_constraints(const DecisionVector& dv, const Scenario& s);
ConstraintValues evaluate_constraints(const DecisionVector& dv, const Scenario& s, const QmcPointSet& pts);

/// Gradient of the merit function on make_grid(T_F).
std::vector<double> gradient(const DecisionVector& dv, const Scenario& s, const QmcPointSet& pts, const AlState& al);

/// Piecewise-linear schedules of the decision vector.
std::vector<ControlSchedule> schedules(const DecisionVector& dv, std::size_t k, std::size_t n_nodes);

/// Initial guesses.
DecisionVector initial_guess(const Scenario& s, const QmcPointSet& pts, InitStrategy strategy, std::uint64_t seed);

/// Moves the rudder nodes by minimum-norm Gauss-Newton steps until every
/// vehicle ends within tol of its start. Returns false when it fails.
bool close_loops(const Scenario& s, const QmcPointSet& pts, DecisionVector& dv, double tol,
                 std::size_t max_iter = 20);

/// Scales T_F at fixed K T_F d (which scales the pattern about the start),
/// re-closing the loops at each trial, to the smallest horizon that meets
/// the risk target. Returns false when no feasible horizon is found.
bool shortest_feasible_scaling(const Scenario& s, const QmcPointSet& pts, DecisionVector& dv);

/// Receives one line per solver stage. Empty by default; not thread safe.
using ProgressSink = std::function<void(const std::string&)>;
void set_progress_sink(ProgressSink sink);

SolveResult solve(const ValidatedScenario& s, const QmcPointSet& pts);
SolveResult solve(const ValidatedScenario& s);

/// Solves for each k with all vehicles sharing the first start pose. When the
/// result for k > 1 is infeasible or slower than the one for k - 1, the
/// previous solution plus a vehicle loitering at the start is tried as an
/// initial guess.
std::vector<SolveResult> sweep_vehicles(const ValidatedScenario& s, const std::vector<std::size_t>& k_list);

}  // namespace solver
}  // namespace mcmplan
