#include <doctest.h>

#include <cstring>
#include <random>

#include "mcmplan/optimizer.hpp"
#include "mcmplan/solver.hpp"
#include "support.hpp"

using namespace mcmplan;

namespace {

// 200 m square, eight nodes per vehicle.
ScenarioConfig small_config(double beta = 0.3, std::size_t k = 1) {
  ScenarioConfig c = testing::reference_config(10.0, beta, k);
  c.solver.n_nodes = 8;
  c.qmc.points = 256;
  c.qmc.shifts = 1;
  return c;
}

DecisionVector random_dv(std::mt19937_64& rng, const Scenario& s, double tf) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  DecisionVector dv;
  dv.t_final = tf;
  dv.rudder.resize(s.k * s.solver.n_nodes);
  for (double& d : dv.rudder) d = u(rng) * s.vehicle.rudder_limit;
  return dv;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("zero rudder transcribes to a straight line") {
    const Scenario s = *validate_scenario(small_config());
    DecisionVector dv{40.0, std::vector<double>(s.solver.n_nodes, 0.0)};
    const std::vector<Trajectory> t = solver::transcribe(dv, s);
    REQUIRE(t.size() == 1);
    const VehicleState& e = t[0].states.back();
    CHECK(e.x - s.starts[0].x == doctest::Approx(s.vehicle.speed * 40.0).epsilon(1e-12));
    CHECK(std::abs(e.y - s.starts[0].y) < 1e-12);
    CHECK(t[0].final_time() == doctest::Approx(40.0).epsilon(1e-12));
  }

  TEST_CASE("identical schedules from identical starts give identical trajectories") {
    const Scenario s = *validate_scenario(small_config(0.3, 2));
    std::mt19937_64 rng(3);
    DecisionVector dv = random_dv(rng, s, 50.0);
    std::copy_n(dv.rudder.begin(), s.solver.n_nodes, dv.rudder.begin() + static_cast<std::ptrdiff_t>(s.solver.n_nodes));
    const std::vector<Trajectory> t = solver::transcribe(dv, s);
    REQUIRE(t.size() == 2);
    CHECK(std::memcmp(t[0].states.data(), t[1].states.data(), t[0].states.size() * sizeof(VehicleState)) == 0);
  }

  TEST_CASE("time-scaled transcription equals direct simulation") {
    const Scenario s = *validate_scenario(small_config());
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const DecisionVector dv = random_dv(rng, s, 20.0 + 13.0 * trial);
      const Trajectory t = solver::transcribe(dv, s)[0];
      const ControlSchedule c = solver::schedules(dv, 1, s.solver.n_nodes)[0];
      const VehicleState st{s.starts[0].x, s.starts[0].y, s.starts[0].psi, 0.0};
      const Trajectory direct = dynamics::simulate(st, c, t.dt, s.vehicle);
      REQUIRE(direct.states.size() == t.states.size());
      const VehicleState& a = t.states.back();
      const VehicleState& b = direct.states.back();
      CHECK(std::abs(a.x - b.x) < 1e-8);
      CHECK(std::abs(a.y - b.y) < 1e-8);
      CHECK(std::abs(a.psi - b.psi) < 1e-10);
      CHECK(std::abs(a.r - b.r) < 1e-10);
    }
  }

  TEST_CASE("constraint values at the time floor") {
    const QmcPointSet pts = generate_qmc_points(256, 1, 1, Domain::rectangle(50, 50, 250, 250));
    {
      const Scenario s = *validate_scenario(small_config(1.0));
      const DecisionVector dv{s.solver.t_min, std::vector<double>(s.solver.n_nodes, 0.0)};
      const ConstraintValues cv = solver::evaluate_constraints(dv, s, pts);
      CHECK(cv.risk_violation == 0.0);
      CHECK(cv.terminal_violation[0] == 0.0);
      CHECK(cv.terminal_distance[0] == doctest::Approx(s.vehicle.speed * s.solver.t_min));
      CHECK(cv.containment_penalty == 0.0);
      CHECK(cv.feasible(s.beta, s.solver));
    }
    {
      // Full-size square: a 0.1 s look barely dents the prior risk of 1.
      const Scenario s = testing::reference_scenario(100.0, 0.05);
      const QmcPointSet full = generate_qmc_points(4096, 8, 1, s.domain);
      const DecisionVector dv{s.solver.t_min, std::vector<double>(s.solver.n_nodes, 0.2)};
      const ConstraintValues cv = solver::evaluate_constraints(dv, s, full);
      CHECK(std::abs(cv.risk_violation - 0.95) < 0.05);
      const double grid = risk_oracle_grid(solver::transcribe(dv, s), s.domain, 512, s.sensor, RiskMode::PaperSum);
      CHECK(std::abs(cv.risk_violation - (grid - 0.05)) < 1e-3);
    }
  }

  TEST_CASE("constraint values are stable under a 10x finer integration step") {
    ScenarioConfig c = small_config();
    c.solver.containment_weight = 1.0;
    const Scenario coarse = *validate_scenario(c);
    c.solver.dt_sim /= 10.0;
    const Scenario fine = *validate_scenario(c);
    c.solver.sample_dt /= 10.0;
    const Scenario dense = *validate_scenario(c);
    const QmcPointSet pts = generate_qmc_points(256, 1, 1, coarse.domain);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
      const DecisionVector dv = random_dv(rng, coarse, 60.0 + 10.0 * trial);
      const ConstraintValues a = solver::evaluate_constraints(dv, coarse, pts);
      const ConstraintValues b = solver::evaluate_constraints(dv, fine, pts);
      CHECK(std::abs(a.risk_violation - b.risk_violation) < 1e-4);
      CHECK(std::abs(a.terminal_violation[0] - b.terminal_violation[0]) < 1e-4);
      CHECK(std::abs(a.terminal_distance[0] - b.terminal_distance[0]) < 1e-4);
      CHECK(std::abs(a.containment_penalty - b.containment_penalty) < 1e-4 * std::max(1.0, b.containment_penalty));
      // Exposure sampling 10x denser: time quadrature error stays inside risk_tol.
      const ConstraintValues d = solver::evaluate_constraints(dv, dense, pts);
      CHECK(std::abs(a.risk - d.risk) < coarse.solver.risk_tol);
    }
  }

  TEST_CASE("adjoint gradient against central differences") {
    ScenarioConfig c = small_config(0.3);
    c.solver.containment_weight = 1e-3;
    const Scenario s = *validate_scenario(c);
    const QmcPointSet pts = generate_qmc_points(256, 1, 2, s.domain);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const DecisionVector dv = random_dv(rng, s, 60.0 + 5.0 * trial);
      solver::AlState al;
      al.lambda_risk = 1.0;
      al.mu = 10.0;
      al.t_ref = dv.t_final;
      al.lambda_terminal = {u(rng), u(rng)};
      // Fixed grid so that the merit is smooth in T_F.
      const solver::Transcription tr(s, pts, solver::make_grid(dv.t_final, s.solver));
      std::vector<double> g;
      tr.merit(dv, al, &g);
      REQUIRE(g.size() == 1 + dv.rudder.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double h = i == 0 ? 1e-5 * dv.t_final : 1e-6;
        DecisionVector p = dv, m = dv;
        (i == 0 ? p.t_final : p.rudder[i - 1]) += h;
        (i == 0 ? m.t_final : m.rudder[i - 1]) -= h;
        const double fd = (tr.merit(p, al) - tr.merit(m, al)) / (2 * h);
        const double rel = std::abs(fd - g[i]) / std::max(1.0, std::abs(fd));
        worst = std::max(worst, rel);
      }
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("with inactive penalties the gradient is the unit T_F vector") {
    const Scenario s = *validate_scenario(small_config(0.99));
    const QmcPointSet pts = generate_qmc_points(256, 1, 2, s.domain);
    std::mt19937_64 rng(17);
    const DecisionVector dv = random_dv(rng, s, 30.0);
    solver::AlState al;
    al.mu = 1e-20;
    al.t_ref = dv.t_final;
    al.lambda_terminal = {0.0, 0.0};
    REQUIRE(solver::evaluate_constraints(dv, s, pts).risk < s.beta);
    const std::vector<double> g = solver::gradient(dv, s, pts, al);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::abs(g[i]) < 1e-9);
  }

  TEST_CASE("mirrored schedules have mirrored gradients") {
    // Domain symmetric about the start line y = 150 and a point set closed
    // under that reflection.
    ScenarioConfig c = small_config(0.3);
    c.starts = {{10.0, 15.0, 0.0}};
    const Scenario s = *validate_scenario(c);
    QmcPointSet pts = generate_qmc_points(256, 1, 4, s.domain);
    const std::size_t n = pts.size();
    pts.shifts = 2;
    pts.shift_vectors.push_back(pts.shift_vectors[0]);
    for (std::size_t i = 0; i < n; ++i) {
      pts.unit_x.push_back(pts.unit_x[i]);
      pts.unit_y.push_back(1.0 - pts.unit_y[i]);
      pts.x.push_back(pts.x[i]);
      pts.y.push_back(300.0 - pts.y[i]);
    }
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
      const DecisionVector dv = random_dv(rng, s, 70.0);
      DecisionVector mirrored = dv;
      for (double& d : mirrored.rudder) d = -d;
      solver::AlState al;
      al.lambda_risk = 1.0;
      al.t_ref = 70.0;
      al.lambda_terminal = {0.3, 0.0};
      const std::vector<double> g = solver::gradient(dv, s, pts, al);
      const std::vector<double> gm = solver::gradient(mirrored, s, pts, al);
      CHECK(gm[0] == doctest::Approx(g[0]).epsilon(1e-9));
      for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(gm[i] == doctest::Approx(-g[i]).epsilon(1e-8).scale(1e-12));
      }
    }
  }

  TEST_CASE("vacuous target: idle solution at the time floor") {
    const ValidatedScenario vs = validate_scenario(small_config(1.0));
    const SolveResult r = solver::solve(vs);
    CHECK(r.converged);
    CHECK(r.feasible);
    CHECK(r.t_final == vs->solver.t_min);
    CHECK(r.init_strategy == "idle");
    CHECK(r.constraints.terminal_violation[0] == 0.0);
    CHECK(r.constraints.risk_violation == 0.0);
  }

  TEST_CASE("small solve: feasible, reproducible, risk recomputes exactly") {
    ScenarioConfig c = small_config(0.3);
    c.qmc.shifts = 2;
    c.solver.max_outer = 3;
    c.solver.max_inner = 20;
    const ValidatedScenario vs = validate_scenario(c);
    const QmcPointSet pts = generate_qmc_points(c.qmc.points, c.qmc.shifts, c.qmc.seed, vs->domain);
    const SolveResult a = solver::solve(vs, pts);
    CHECK(a.feasible);
    CHECK(a.t_final > vs->solver.t_min);
    CHECK(a.risk.value <= vs->beta + vs->solver.risk_tol);
    CHECK(a.constraints.terminal_distance[0] <= vs->solver.pos_tol);
    CHECK(std::abs(residual_risk(a.trajectories, pts, vs->sensor, vs->risk_mode).value - a.risk.value) <= 1e-10);
    CHECK(std::abs(residual_risk(a.trajectories, pts, vs->sensor, RiskMode::JointExposure).value - a.risk_joint) <=
          1e-10);
    for (double d : a.decision.rudder) CHECK(std::abs(d) <= vs->vehicle.rudder_limit);
    CHECK(a.objective_history.size() == a.outer_iterations);

    const SolveResult b = solver::solve(vs, pts);
    CHECK(a.decision == b.decision);
    CHECK(a.risk.value == b.risk.value);
  }

  TEST_CASE("grid sizing") {
    TranscriptionConfig c;
    for (const double tf : {0.1, 1.0, 59.0, 100.0, 100.5, 3218.14}) {
      const solver::Grid g = solver::make_grid(tf, c);
      CHECK(g.samples % (c.n_nodes - 1) == 0);
      CHECK(tf / static_cast<double>(g.samples) <= c.sample_dt);
      CHECK(tf / static_cast<double>(g.steps()) <= c.dt_sim);
      CHECK(g.samples < tf / c.sample_dt + static_cast<double>(c.n_nodes - 1));
      CHECK(tf / static_cast<double>(g.steps() - g.samples) > c.dt_sim);
    }
  }
}

TEST_SUITE("optimizer") {
  TEST_CASE("L-BFGS minimizes the Rosenbrock function") {
    const optim::Objective f = [](const std::vector<double>& x, std::vector<double>& g) {
      const double a = 1.0 - x[0];
      const double b = x[1] - x[0] * x[0];
      g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
      return a * a + 100.0 * b * b;
    };
    optim::LbfgsOptions opt;
    opt.max_iterations = 500;
    opt.max_step = 0.5;
    const optim::LbfgsResult r = optim::minimize_lbfgs(f, {-1.2, 1.0}, [](std::vector<double>&) {}, opt);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("projection gives the bound-constrained minimizer") {
    const optim::Objective f = [](const std::vector<double>& x, std::vector<double>& g) {
      g = {2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0), 2.0 * x[2]};
      return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 1.0) * (x[1] + 1.0) + x[2] * x[2];
    };
    const optim::Projection box = [](std::vector<double>& x) {
      for (double& v : x) v = std::clamp(v, -0.5, 1.0);
    };
    const optim::LbfgsResult r = optim::minimize_lbfgs(f, {0.0, 0.0, 0.7}, box, {});
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(-0.5));
    CHECK(std::abs(r.x[2]) < 1e-5);
  }
}
