// Acceptance run: one PASS/FAIL line per criterion. Criteria can be selected
// by number on the command line (default: all).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "mcmplan/cli.hpp"
#include "mcmplan/io.hpp"
#include "mcmplan/qmc.hpp"
#include "mcmplan/risk.hpp"
#include "mcmplan/sensor.hpp"
#include "mcmplan/solver.hpp"
#include "support.hpp"

using namespace mcmplan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::string kWork = std::string(MCMPLAN_TEST_TMP) + "/acceptance";
const std::string kScenario = testing::data_path("acceptance_scenario.json");

int cli_run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "mcmplan");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

json read_json(const std::string& path) { return json::parse(io::read_text(path)); }

double max_of(const json& j) {
  if (!j.is_array()) return j.get<double>();
  double m = 0.0;
  for (const auto& v : j) m = std::max(m, v.get<double>());
  return m;
}

const Domain kSquare = Domain::rectangle(500, 500, 2500, 2500);

Trajectory random_in_square(std::uint64_t seed, double tf, double dt = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(900.0, 2100.0);
  std::uniform_real_distribution<double> a(-3.0, 3.0);
  return testing::random_trajectory(seed, tf, dt, {u(rng), u(rng), a(rng), 0.0}, VehicleParams{});
}

Verdict sensor_suite() {
  Verdict v;
  const SensorParams sp{};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(500.0, 2500.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::size_t gate_bad = 0, rate_bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const VehicleState s{pos(rng), pos(rng), ang(rng), 0.0};
    const Vec2 w{pos(rng), pos(rng)};
    const double fa = sensor::horizontal_gate(sensor::bearing(s, w), sp);
    const double fe = sensor::vertical_gate(sensor::depression(s, w, sp) - sp.eps_de, sp);
    if (!(fa > 0.0 && fa < 1.0 && fe > 0.0 && fe < 1.0)) ++gate_bad;
    const double g = sensor::detection_rate(s, w, sp);
    if (!(g > 0.0 && g < sp.lambda)) ++rate_bad;
  }
  v.require(gate_bad == 0, std::to_string(gate_bad) + " gate values outside (0, 1)");
  v.require(rate_bad == 0, std::to_string(rate_bad) + " rates outside (0, lambda)");

  double worst = 0.0;
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const VehicleState s{pos(rng), pos(rng), ang(rng), 0.0};
    const Vec2 w{pos(rng), pos(rng)};
    const double th = ang(rng);
    const double tx = shift(rng), ty = shift(rng);
    const auto move = [&](Vec2 p) {
      return Vec2{std::cos(th) * p.x - std::sin(th) * p.y + tx, std::sin(th) * p.x + std::cos(th) * p.y + ty};
    };
    const Vec2 sp2 = move({s.x, s.y});
    const VehicleState moved{sp2.x, sp2.y, s.psi + th, 0.0};
    worst = std::max(worst, std::abs(sensor::detection_rate(moved, move(w), sp) - sensor::detection_rate(s, w, sp)));
  }
  v.require(worst <= 1e-12, "rigid-motion change " + fmt("%.3g", worst));
  v.note("max rigid-motion change " + fmt("%.2e", worst));

  // TL(r) = FOM by bisection on the closed form.
  double lo = 1.0, hi = 1e5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (20.0 * std::log10(mid) + sp.attenuation * mid / 1000.0 < sp.fom ? lo : hi) = mid;
  }
  const double p_half = sensor::detection_probability(0.5 * (lo + hi), sp);
  v.require(std::abs(p_half - 0.5) <= 1e-9, "p at TL = FOM is " + fmt("%.12f", p_half));
  return v;
}

Verdict dynamics_oracle() {
  Verdict v;
  const VehicleParams p{};
  const double d0 = 0.2;
  const ControlSchedule c{{0.0, 10.0}, {d0, d0}};
  const Trajectory t = dynamics::simulate({0, 0, 0, 0}, c, 0.01, p);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const double exact = p.gain * d0 * -std::expm1(-0.01 * static_cast<double>(i) / p.time_constant);
    worst = std::max(worst, std::abs(t.states[i].r - exact));
  }
  v.require(worst <= 1e-6, "turn-rate error " + fmt("%.3g", worst));
  v.note("max turn-rate error " + fmt("%.2e", worst));
  const double rel = std::abs(dynamics::arc_length(t) - p.speed * t.final_time()) / (p.speed * t.final_time());
  v.require(rel <= 1e-6, "arc length relative error " + fmt("%.3g", rel));
  return v;
}

Verdict quadrature_oracle() {
  Verdict v;
  const SensorParams sp{};
  const QmcPointSet pts = generate_qmc_points(4096, 8, 1, kSquare);
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    const std::vector<Trajectory> t{random_in_square(seed, 300.0)};
    const double q = residual_risk(t, pts, sp, RiskMode::PaperSum).value;
    const double g = risk_oracle_grid(t, kSquare, 512, sp, RiskMode::PaperSum);
    const double rel = std::abs(q - g) / g;
    v.require(rel <= 1e-2, "trajectory " + std::to_string(seed) + " relative difference " + fmt("%.3g", rel));
    v.note(fmt("rel %.2e", rel));
  }
  return v;
}

Verdict risk_properties() {
  Verdict v;
  const SensorParams sp{};
  const QmcPointSet pts = generate_qmc_points(4096, 8, 1, kSquare);
  Trajectory idle;
  idle.dt = 1.0;
  idle.states = {{510, 510, 0, 0}};
  idle.rudder = {0.0};
  v.require(residual_risk(std::vector<Trajectory>{idle}, pts, sp, RiskMode::PaperSum).value == 1.0, "risk(0) != 1");
  v.require(residual_risk(std::vector<Trajectory>(3, idle), pts, sp, RiskMode::PaperSum).value == 3.0,
            "paper-sum risk(0) != 3 for k = 3");

  std::mt19937_64 rng(7);
  std::size_t increases = 0;
  for (int i = 0; i < 50; ++i) {
    const Trajectory full = random_in_square(1000 + i, 200.0);
    Trajectory part = full;
    const std::size_t cut = 2 + rng() % (full.states.size() - 2);
    part.states.resize(cut);
    part.rudder.resize(cut);
    if (residual_risk(std::vector<Trajectory>{full}, pts, sp, RiskMode::PaperSum).value >
        residual_risk(std::vector<Trajectory>{part}, pts, sp, RiskMode::PaperSum).value) {
      ++increases;
    }
  }
  v.require(increases == 0, std::to_string(increases) + " extensions increased the risk");

  std::size_t above = 0;
  for (int i = 0; i < 20; ++i) {
    const Trajectory a = random_in_square(2000 + i, 150.0);
    const Trajectory b = random_in_square(3000 + i, 150.0);
    const double joint = residual_risk(std::vector<Trajectory>{a, b}, pts, sp, RiskMode::JointExposure).value;
    const double ra = residual_risk(std::vector<Trajectory>{a}, pts, sp, RiskMode::JointExposure).value;
    const double rb = residual_risk(std::vector<Trajectory>{b}, pts, sp, RiskMode::JointExposure).value;
    if (joint > std::min(ra, rb)) ++above;
  }
  v.require(above == 0, std::to_string(above) + " joint risks above a single-vehicle risk");
  return v;
}

Verdict gradient_check() {
  Verdict v;
  ScenarioConfig c = testing::reference_config(10.0, 0.3);
  c.solver.n_nodes = 8;
  c.solver.containment_weight = 1e-3;
  const Scenario s = *validate_scenario(c);
  const QmcPointSet pts = generate_qmc_points(256, 1, 2, s.domain);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    DecisionVector dv;
    dv.t_final = 60.0 + 5.0 * trial;
    for (std::size_t j = 0; j < 8; ++j) dv.rudder.push_back(0.3 * s.vehicle.rudder_limit * u(rng));
    solver::AlState al;
    al.lambda_risk = 1.0;
    al.t_ref = dv.t_final;
    al.lambda_terminal = {u(rng), u(rng)};
    const solver::Transcription tr(s, pts, solver::make_grid(dv.t_final, s.solver));
    std::vector<double> g;
    tr.merit(dv, al, &g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double h = i == 0 ? 1e-5 * dv.t_final : 1e-6;
      DecisionVector p = dv, m = dv;
      (i == 0 ? p.t_final : p.rudder[i - 1]) += h;
      (i == 0 ? m.t_final : m.rudder[i - 1]) -= h;
      const double fd = (tr.merit(p, al) - tr.merit(m, al)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(fd)));
    }
  }
  v.require(worst <= 1e-4, "relative error " + fmt("%.3g", worst));
  v.note("max relative error " + fmt("%.2e", worst));
  return v;
}

Verdict comparison() {
  Verdict v;
  const std::string out = kWork + "/compare";
  fs::remove_all(out);
  std::string err;
  const int code = cli_run({"compare", "--scenario", kScenario, "--out", out}, &err);
  v.require(code == 0 || code == 2, "compare exited with " + std::to_string(code) + ": " + err);
  if (code != 0 && code != 2) return v;
  const json cmp = read_json(out + "/comparison.json");
  const json plan = read_json(out + "/plan/summary.json");
  const json base = read_json(out + "/baseline/summary.json");
  const double beta = plan["beta"].get<double>();
  const double t_opt = cmp["optimal_path_time_s"].get<double>();
  const double t_base = cmp["boustrophedon_path_time_s"].get<double>();
  const double speedup = t_base / t_opt;
  v.require(t_opt < t_base, "solver T_F not below the baseline");
  v.require(speedup >= 1.1, "speedup " + fmt("%.3f", speedup) + " below 1.1");
  v.require(plan["risk"]["value"].get<double>() <= beta + 1e-3, "solver risk above beta + 1e-3");
  v.require(base["risk"]["value"].get<double>() <= beta + 1e-3, "baseline risk above beta + 1e-3");
  v.require(base["turns_outside_domain"].get<bool>(), "baseline turn inside the domain");
  v.require(max_of(plan["violations"]["terminal_distance_m"]) <= 0.5, "solver does not return within 0.5 m");
  v.require(base["terminal_distance_m"].get<double>() <= 0.5, "baseline does not return within 0.5 m");
  v.note("T_F " + fmt("%.2f s", t_opt) + ", baseline " + fmt("%.2f s", t_base) + ", speedup " +
         fmt("%.3f", speedup) + (code == 0 ? "" : ", solver not converged"));
  return v;
}

Verdict sweep_trend() {
  Verdict v;
  ScenarioConfig c = parse_scenario(io::read_text(kScenario));
  c.solver.n_nodes = 40;
  c.qmc.points = 2048;
  const std::string dir = kWork + "/sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_text(dir + "/scenario.json", scenario_to_json(c));
  std::string err;
  const int code = cli_run({"sweep", "--scenario", dir + "/scenario.json", "--out", dir + "/out", "--k-max", "3"}, &err);
  v.require(code == 0 || code == 2, "sweep exited with " + std::to_string(code) + ": " + err);
  if (code != 0 && code != 2) return v;
  double t[4] = {0, 0, 0, 0};
  for (int k = 1; k <= 3; ++k) {
    const json s = read_json(dir + "/out/k" + std::to_string(k) + "/summary.json");
    t[k] = s["t_final_s"].get<double>();
    v.require(s["feasible"].get<bool>(), "k = " + std::to_string(k) + " infeasible");
  }
  v.require(t[2] <= t[1] && t[3] <= t[2], "T_F increases with k");
  v.require(t[1] - t[2] >= (t[2] - t[3]) - 0.02 * t[1], "no diminishing returns");
  v.note("T_F " + fmt("%.2f", t[1]) + " / " + fmt("%.2f", t[2]) + " / " + fmt("%.2f s", t[3]));
  return v;
}

Verdict determinism() {
  Verdict v;
  const std::string a = kWork + "/det_a", b = kWork + "/det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  v.require(cli_run({"baseline", "--scenario", kScenario, "--out", a}) == 0, "first baseline run failed");
  v.require(cli_run({"baseline", "--scenario", kScenario, "--out", b}) == 0, "second baseline run failed");
  if (!v.pass) return v;
  for (const char* f : {"trajectories.csv", "coverage.csv", "summary.json"}) {
    v.require(io::read_text(a + "/" + f) == io::read_text(b + "/" + f), std::string(f) + " differs between runs");
  }
  std::vector<std::string> dirs{a};
  if (fs::exists(kWork + "/compare/plan/trajectories.csv")) dirs.push_back(kWork + "/compare/plan");
  for (const std::string& d : dirs) {
    const std::string e = d + "_eval";
    fs::remove_all(e);
    if (cli_run({"evaluate", "--scenario", kScenario, "--trajectory", d + "/trajectories.csv", "--out", e}) != 0) {
      v.require(false, "evaluate failed on " + d);
      continue;
    }
    const double r0 = read_json(d + "/summary.json")["risk"]["value"].get<double>();
    const double r1 = read_json(e + "/evaluation.json")["risk"]["value"].get<double>();
    v.require(std::abs(r0 - r1) <= 1e-10, "evaluate differs by " + fmt("%.3g", std::abs(r0 - r1)) + " on " + d);
  }
  v.note("evaluated " + std::to_string(dirs.size()) + " trajectory files");
  return v;
}

Verdict degenerate_threshold() {
  Verdict v;
  const std::string out = kWork + "/trivial";
  fs::remove_all(out);
  const int code = cli_run({"plan", "--scenario", kScenario, "--out", out, "--risk", "1.0"});
  v.require(code == 0, "plan exited with " + std::to_string(code));
  if (code != 0) return v;
  const json s = read_json(out + "/summary.json");
  v.require(s["converged"].get<bool>(), "not converged");
  v.require(s["t_final_s"].get<double>() == s["scenario"]["solver"]["t_min_s"].get<double>(), "T_F not at the floor");
  v.require(s["violations"]["risk"].get<double>() == 0.0, "risk violation");
  v.require(max_of(s["violations"]["terminal_m"]) == 0.0, "terminal violation");
  v.require(s["violations"]["containment_m2_s"].get<double>() == 0.0, "containment violation");
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  fs::create_directories(kWork);
  const std::vector<Criterion> all{
      {1, "sensor unit suite", 5, sensor_suite},
      {2, "dynamics oracle", 5, dynamics_oracle},
      {3, "quadrature oracle", 120, quadrature_oracle},
      {4, "risk properties", 60, risk_properties},
      {5, "gradient check", 120, gradient_check},
      {6, "comparison ordering", 1800, comparison},
      {7, "vehicle-sweep trend", 3600, sweep_trend},
      {8, "determinism and round trip", 60, determinism},
      {9, "degenerate threshold", 60, degenerate_threshold},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= c.budget_s, "runtime " + fmt("%.1f s", secs) + " over budget " + fmt("%.0f s", c.budget_s));
    if (v.detail.empty()) {
      std::printf("%s criterion %d: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs);
    } else {
      std::printf("%s criterion %d: %s (%s) [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    }
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
