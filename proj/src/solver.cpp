#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mcmplan/baseline.hpp"
#include "mcmplan/optimizer.hpp"
#include "mcmplan/solver.hpp"

namespace mcmplan::solver {
namespace {

ProgressSink& sink() {
  static ProgressSink s;
  return s;
}

std::chrono::steady_clock::time_point& progress_epoch() {
  static std::chrono::steady_clock::time_point t0;
  return t0;
}

template <class... A>
void progress(const char* fmt, A... args) {
  if (!sink()) return;
  char buf[256];
  const int n = std::snprintf(buf, sizeof buf, "[%8.1f s] ",
                              std::chrono::duration<double>(std::chrono::steady_clock::now() - progress_epoch()).count());
  std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), fmt, args...);
  sink()(buf);
}

struct Incumbent {
  DecisionVector dv;
  bool have = false;

  void offer(const DecisionVector& c) {
    if (!have || c.t_final < dv.t_final) {
      dv = c;
      have = true;
    }
  }
};

double violation_measure(const ConstraintValues& cv, double beta, double pos_tol) {
  double worst = std::max(0.0, cv.risk - beta) / kRiskScale;
  for (const double d : cv.terminal_distance) worst = std::max(worst, std::max(0.0, d - pos_tol) / pos_tol);
  return worst;
}

ConstraintValues constraints_at(const Scenario& s, const QmcPointSet& pts, const DecisionVector& dv) {
  return Transcription(s, pts, make_grid(dv.t_final, s.solver)).constraints(dv);
}

// Closes the loops of an iterate and, when that alone does not give a
// feasible plan, rescales it to the shortest feasible horizon.
void polish(const Scenario& s, const QmcPointSet& pts, const DecisionVector& x, Incumbent& best) {
  DecisionVector c = x;
  close_loops(s, pts, c, 0.5 * s.solver.pos_tol);
  if (constraints_at(s, pts, c).feasible(s.beta, s.solver)) best.offer(c);
  DecisionVector scaled = c;
  if (shortest_feasible_scaling(s, pts, scaled) && constraints_at(s, pts, scaled).feasible(s.beta, s.solver)) {
    best.offer(scaled);
  }
}

// Internal variables: tau = T_F / t_ref and u = K T_F d / u_scale. At fixed
// u the trajectory shape is independent of T_F apart from the steering lag,
// so changing tau rescales the pattern instead of distorting it.
struct Variables {
  double t_ref;
  double u_scale;
  double gain;

  std::vector<double> to_internal(const DecisionVector& dv) const {
    std::vector<double> y(1 + dv.rudder.size());
    y[0] = dv.t_final / t_ref;
    for (std::size_t i = 0; i < dv.rudder.size(); ++i) y[1 + i] = gain * dv.t_final * dv.rudder[i] / u_scale;
    return y;
  }

  DecisionVector from_internal(const std::vector<double>& y) const {
    DecisionVector dv;
    dv.t_final = y[0] * t_ref;
    dv.rudder.resize(y.size() - 1);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) dv.rudder[i] = y[1 + i] * u_scale / (gain * dv.t_final);
    return dv;
  }

  // Gradient in (T_F, d) to gradient in (tau, u).
  void chain(const DecisionVector& dv, const std::vector<double>& g, std::vector<double>& gy) const {
    gy.resize(g.size());
    double dt = g[0];
    for (std::size_t i = 0; i < dv.rudder.size(); ++i) {
      dt -= g[1 + i] * dv.rudder[i] / dv.t_final;
      gy[1 + i] = g[1 + i] * u_scale / (gain * dv.t_final);
    }
    gy[0] = dt * t_ref;
  }
};

struct RunStats {
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Augmented-Lagrangian iterations from one initial guess.
Incumbent run_al(const Scenario& s, const QmcPointSet& pts, DecisionVector x, double swath, RunStats& stats) {
  const TranscriptionConfig& cfg = s.solver;
  const VehicleParams& vp = s.vehicle;
  Incumbent best;
  polish(s, pts, x, best);
  if (best.have) x = best.dv;
  progress("start: T_F %.2f s, polished %s", x.t_final, best.have ? "feasible" : "infeasible");

  AlState al;
  al.mu = cfg.penalty_init;
  al.t_ref = x.t_final;
  al.lambda_terminal.assign(2 * s.k, 0.0);
  const Variables vars{x.t_final, std::max(1.0, x.t_final * vp.speed / swath), vp.gain};
  const double tau_lo = cfg.t_min / vars.t_ref;
  const double tau_hi = cfg.t_max / vars.t_ref;

  const auto project = [&](std::vector<double>& y) {
    y[0] = std::clamp(y[0], tau_lo, tau_hi);
    const double lim = vp.gain * y[0] * vars.t_ref * vp.rudder_limit / vars.u_scale;
    for (std::size_t i = 1; i < y.size(); ++i) y[i] = std::clamp(y[i], -lim, lim);
  };

  // The inner minimization sees a prefix of the shifts; multiplier updates,
  // polishing and the incumbent use the full set.
  const QmcPointSet inner_pts = qmc::first_shifts(pts, cfg.inner_shifts);
  double prev_violation = std::numeric_limits<double>::infinity();
  double prev_t = x.t_final;
  for (std::size_t outer = 0; outer < cfg.max_outer; ++outer) {
    const Transcription tr(s, inner_pts, make_grid(x.t_final, cfg));
    const optim::Objective objective = [&](const std::vector<double>& y, std::vector<double>& gy) {
      const DecisionVector dv = vars.from_internal(y);
      std::vector<double> g;
      const double m = tr.merit(dv, al, &g);
      vars.chain(dv, g, gy);
      for (double& v : gy) v /= vars.t_ref;
      return m / vars.t_ref;
    };
    optim::LbfgsOptions opt;
    opt.max_iterations = cfg.max_inner;
    opt.gradient_tol = 1e-5;
    opt.f_rel_tol = 1e-9;
    std::vector<double> y0 = vars.to_internal(x);
    project(y0);
    const optim::LbfgsResult r = optim::minimize_lbfgs(objective, std::move(y0), project, opt);
    x = vars.from_internal(r.x);
    stats.inner += r.iterations;
    stats.evaluations += r.evaluations;
    stats.outer = outer + 1;
    progress("inner: %zu iterations, %zu evaluations", r.iterations, r.evaluations);

    const Transcription at_x(s, pts, make_grid(x.t_final, cfg));
    const ConstraintValues cv = at_x.constraints(x);
    const double g = (cv.risk - s.beta) / kRiskScale;
    al.lambda_risk = std::max(0.0, al.lambda_risk + al.mu * g);
    for (std::size_t v = 0; v < s.k; ++v) {
      Vec2 off;
      std::vector<double> jx, jy;
      at_x.terminal_jacobian(x, v, off, jx, jy);
      al.lambda_terminal[2 * v] += al.mu * off.x / at_x.terminal_scale();
      al.lambda_terminal[2 * v + 1] += al.mu * off.y / at_x.terminal_scale();
    }
    const double violation = violation_measure(cv, s.beta, cfg.pos_tol);
    if (violation > 0.25 * prev_violation) al.mu = std::min(al.mu * cfg.penalty_growth, 1e8);
    prev_violation = violation;

    polish(s, pts, x, best);
    progress("outer %zu: T_F %.2f s, risk %.5f, violation %.3g, mu %.3g, inner %zu, best %.2f", outer + 1,
             x.t_final, cv.risk, violation, al.mu, r.iterations, best.have ? best.dv.t_final : 0.0);
    stats.history.push_back(best.have ? best.dv.t_final : std::numeric_limits<double>::quiet_NaN());

    const bool stalled = std::abs(x.t_final - prev_t) <= 1e-3 * prev_t;
    prev_t = x.t_final;
    if (cv.feasible(s.beta, cfg) && stalled) {
      stats.converged = true;
      break;
    }
  }
  if (!best.have) best.dv = x;
  return best;
}

SolveResult assemble(const Scenario& s, const QmcPointSet& pts, const DecisionVector& dv) {
  SolveResult out;
  const Transcription tr(s, pts, make_grid(dv.t_final, s.solver));
  out.t_final = dv.t_final;
  out.decision = dv;
  out.schedules = schedules(dv, s.k, s.solver.n_nodes);
  out.trajectories = tr.sampled(dv);
  out.constraints = tr.constraints(dv, &out.risk);
  const ExposureTable table = exposure_table(out.trajectories, pts, s.sensor);
  out.risk_paper_sum = risk_from_table(table, pts, RiskMode::PaperSum).value;
  out.risk_joint = risk_from_table(table, pts, RiskMode::JointExposure).value;
  out.feasible = out.constraints.feasible(s.beta, s.solver);
  return out;
}

bool better_result(const SolveResult& a, const SolveResult& b, const Scenario& s) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.t_final < b.t_final;
  return violation_measure(a.constraints, s.beta, s.solver.pos_tol) <
         violation_measure(b.constraints, s.beta, s.solver.pos_tol);
}

SolveResult solve_from(const Scenario& s, const QmcPointSet& pts, const std::vector<DecisionVector>& guesses,
                       const std::vector<std::string>& labels) {
  const double swath = baseline::effective_swath_halfwidth(s.sensor, s.vehicle, s.baseline.pass_threshold);
  SolveResult best;
  bool have = false;
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    RunStats stats;
    const Incumbent inc = run_al(s, pts, guesses[i], swath, stats);
    SolveResult r = assemble(s, pts, inc.dv);
    r.outer_iterations = stats.outer;
    r.inner_iterations = stats.inner;
    r.evaluations = stats.evaluations;
    r.objective_history = std::move(stats.history);
    r.converged = stats.converged && r.feasible;
    r.init_strategy = labels[i];
    if (!have || better_result(r, best, s)) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

// Constant-rudder circles at the start pose, closed after a whole number of
// turns of radius about twice the minimum.
std::vector<double> loiter_rudder(const Scenario& s, double t_final) {
  const VehicleParams& vp = s.vehicle;
  const double circle = 2.0 * std::numbers::pi * 2.0 * vp.min_turn_radius();
  const double turns = std::max(1.0, std::floor(vp.speed * t_final / circle));
  const double d = std::min(2.0 * std::numbers::pi * turns / (vp.gain * t_final), vp.rudder_limit);
  return std::vector<double>(s.solver.n_nodes, d);
}

}  // namespace

void set_progress_sink(ProgressSink s) {
  sink() = std::move(s);
  progress_epoch() = std::chrono::steady_clock::now();
}

SolveResult solve(const ValidatedScenario& vs, const QmcPointSet& pts) {
  const Scenario& s = *vs;
  const TranscriptionConfig& cfg = s.solver;

  // A target that is met without moving needs no search.
  DecisionVector idle;
  idle.t_final = cfg.t_min;
  idle.rudder.assign(s.k * cfg.n_nodes, 0.0);
  if (constraints_at(s, pts, idle).feasible(s.beta, cfg)) {
    SolveResult r = assemble(s, pts, idle);
    r.converged = r.feasible;
    r.objective_history = {idle.t_final};
    r.init_strategy = "idle";
    return r;
  }

  std::vector<DecisionVector> guesses;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cfg.n_starts; ++i) {
    const InitStrategy used = i == 0 ? cfg.init_strategy : InitStrategy::Random;
    guesses.push_back(initial_guess(s, pts, used, s.qmc.seed + i));
    progress("initial guess %zu (%s): T_F %.2f s", i, to_string(used).c_str(), guesses.back().t_final);
    labels.push_back(to_string(used));
  }
  return solve_from(s, pts, guesses, labels);
}

SolveResult solve(const ValidatedScenario& vs) {
  const QmcPointSet pts = generate_qmc_points(vs->qmc.points, vs->qmc.shifts, vs->qmc.seed, vs->domain);
  return solve(vs, pts);
}

std::vector<SolveResult> sweep_vehicles(const ValidatedScenario& vs, const std::vector<std::size_t>& k_list) {
  const QmcPointSet pts = generate_qmc_points(vs->qmc.points, vs->qmc.shifts, vs->qmc.seed, vs->domain);
  std::vector<SolveResult> out;
  for (const std::size_t k : k_list) {
    const ValidatedScenario sk = validate_scenario(with_vehicle_count(*vs, k));
    SolveResult r = solve(sk, pts);
    const bool improved = !out.empty() && r.feasible && r.t_final <= out.back().t_final;
    if (!out.empty() && !improved && out.back().decision.rudder.size() / sk->solver.n_nodes < k &&
        r.init_strategy != "idle") {
      const SolveResult& prev = out.back();
      const std::size_t n = sk->solver.n_nodes;
      const std::size_t k_prev = prev.decision.rudder.size() / n;
      DecisionVector warm = prev.decision;
      for (std::size_t v = k_prev; v < k; ++v) {
        const std::vector<double> loiter = loiter_rudder(*sk, warm.t_final);
        warm.rudder.insert(warm.rudder.end(), loiter.begin(), loiter.end());
      }
      SolveResult w = solve_from(*sk, pts, {warm}, {"warm-start"});
      if (better_result(w, r, *sk)) r = std::move(w);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mcmplan::solver
