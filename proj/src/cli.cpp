#include "mcmplan/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mcmplan/baseline.hpp"
#include "mcmplan/io.hpp"
#include "mcmplan/qmc.hpp"
#include "mcmplan/scenario.hpp"
#include "mcmplan/solver.hpp"

namespace mcmplan::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr std::size_t kCoverageCells = 128;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> risk;
  std::optional<std::size_t> vehicles;
  std::optional<std::string> risk_mode;
  std::optional<std::size_t> nodes;
  std::optional<std::string> spacing;

  json to_json() const {
    json j = json::object();
    if (seed) j["seed"] = *seed;
    if (risk) j["risk"] = *risk;
    if (vehicles) j["vehicles"] = *vehicles;
    if (risk_mode) j["risk_mode"] = *risk_mode;
    if (nodes) j["nodes"] = *nodes;
    if (spacing) j["spacing"] = *spacing;
    return j;
  }
};

struct Options {
  std::string scenario;
  std::string out;
  std::string trajectory;
  std::size_t k_max = 3;
  bool verbose = false;
  Overrides ov;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void apply(const Overrides& ov, ScenarioConfig& c) {
  if (ov.seed) c.qmc.seed = *ov.seed;
  if (ov.risk) c.beta = *ov.risk;
  if (ov.vehicles) {
    c.vehicles = *ov.vehicles;
    if (c.starts.size() > 1 && c.starts.size() != c.vehicles) c.starts.resize(1);
  }
  if (ov.risk_mode) c.risk_mode = risk_mode_from_string(*ov.risk_mode);
  if (ov.nodes) c.solver.n_nodes = *ov.nodes;
  if (ov.spacing) {
    if (*ov.spacing == "auto") {
      c.baseline.spacing.reset();
    } else {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(*ov.spacing, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != ov.spacing->size()) throw UsageError("--spacing expects a number or 'auto', got '" + *ov.spacing + "'");
      if (!(v > 0.0)) throw UsageError("--spacing must be positive");
      c.baseline.spacing = v;
    }
  }
}

struct Loaded {
  std::string text;
  ScenarioConfig config;
};

Loaded load(const Options& opt) {
  Loaded l;
  l.text = io::read_text(opt.scenario);
  l.config = parse_scenario(l.text);
  apply(opt.ov, l.config);
  return l;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects artifacts of one command; the manifest is written last.
class Run {
 public:
  Run(std::string command, const Options& opt)
      : command_(std::move(command)), opt_(opt), start_(std::chrono::steady_clock::now()), started_at_(timestamp()) {
    if (!opt.out.empty()) fs::create_directories(opt.out);
  }

  std::string path(const std::string& rel) const {
    const fs::path p = fs::path(opt_.out) / rel;
    fs::create_directories(p.parent_path());
    return p.string();
  }

  void add(const std::string& rel) { artifacts_.push_back(rel); }

  void write_json(const std::string& rel, const json& j) {
    io::write_text(path(rel), j.dump(2) + "\n");
    add(rel);
  }

  void finish(std::uint64_t seed, int exit_code) {
    json m;
    m["command"] = command_;
    m["scenario_path"] = opt_.scenario;
    if (!opt_.trajectory.empty()) m["trajectory_path"] = opt_.trajectory;
    m["output_directory"] = opt_.out;
    m["seed"] = seed;
    m["overrides"] = opt_.ov.to_json();
    m["started_at"] = started_at_;
    m["finished_at"] = timestamp();
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["exit_code"] = exit_code;
    m["artifacts"] = artifacts_;
    io::write_text(path("manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  const Options& opt_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
  std::vector<std::string> artifacts_;
};

json risk_json(const RiskEstimate& r, RiskMode mode) {
  json j;
  j["mode"] = to_string(mode);
  j["value"] = r.value;
  j["std_error"] = r.std_error;
  j["per_shift"] = r.per_shift;
  return j;
}

json qmc_json(const QmcPointSet& pts) {
  json j;
  j["points"] = pts.n;
  j["shifts"] = pts.shifts;
  j["seed"] = pts.seed;
  j["construction"] = QmcPointSet::construction;
  j["generator"] = pts.generator;
  return j;
}

json coverage_json(const CoverageGrid& g) {
  json j;
  j["nx"] = g.nx;
  j["ny"] = g.ny;
  j["seen_threshold"] = g.seen_threshold;
  j["seen_fraction"] = g.seen_fraction();
  return j;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

QmcPointSet points_for(const Scenario& s) {
  return generate_qmc_points(s.qmc.points, s.qmc.shifts, s.qmc.seed, s.domain);
}

// Writes trajectories, coverage grid and summary of a solve into `dir`
// (relative to the run's output directory) and returns the summary.
json write_plan(Run& run, const std::string& dir, const Loaded& l, const Scenario& s, const QmcPointSet& pts,
                const SolveResult& r) {
  io::write_trajectories(run.path(dir + "trajectories.csv"), r.trajectories);
  run.add(dir + "trajectories.csv");
  const CoverageGrid grid = coverage_grid(r.trajectories, s.domain, kCoverageCells, kCoverageCells, s.sensor);
  io::write_coverage(run.path(dir + "coverage.csv"), grid);
  run.add(dir + "coverage.csv");

  json j;
  j["planner"] = "optimal-control";
  j["scenario_hash"] = io::fnv1a_hex(l.text);
  j["scenario"] = json::parse(scenario_to_json(l.config));
  j["vehicles"] = s.k;
  j["beta"] = s.beta;
  j["t_final_s"] = r.t_final;
  j["path_time_s"] = r.t_final;
  j["risk"] = risk_json(r.risk, s.risk_mode);
  j["risk_paper_sum"] = r.risk_paper_sum;
  j["risk_joint"] = r.risk_joint;
  json v;
  v["risk"] = r.constraints.risk_violation;
  v["terminal_distance_m"] = r.constraints.terminal_distance;
  v["terminal_m"] = r.constraints.terminal_violation;
  v["containment_m2_s"] = r.constraints.containment_penalty;
  j["violations"] = v;
  j["feasible"] = r.feasible;
  j["converged"] = r.converged;
  j["iterations"] = {{"outer", r.outer_iterations}, {"inner", r.inner_iterations}, {"evaluations", r.evaluations}};
  json hist = json::array();
  for (const double h : r.objective_history) hist.push_back(finite_or_null(h));
  j["objective_history"] = hist;
  j["init_strategy"] = r.init_strategy;
  j["seed"] = s.qmc.seed;
  j["qmc"] = qmc_json(pts);
  j["coverage"] = coverage_json(grid);
  run.write_json(dir + "summary.json", j);
  return j;
}

json write_baseline(Run& run, const std::string& dir, const Loaded& l, const Scenario& s, const QmcPointSet& pts,
                    const BaselineResult& b, bool& feasible) {
  const std::vector<Trajectory> trajs{b.trajectory};
  io::write_trajectories(run.path(dir + "trajectories.csv"), trajs);
  run.add(dir + "trajectories.csv");
  const CoverageGrid grid = coverage_grid(trajs, s.domain, kCoverageCells, kCoverageCells, s.sensor);
  io::write_coverage(run.path(dir + "coverage.csv"), grid);
  run.add(dir + "coverage.csv");

  const VehicleState& last = b.trajectory.states.back();
  // The tour returns to its own survey start, which lies outside the domain
  // unless the scenario fixes it.
  const double home = std::hypot(last.x - b.plan.start.x, last.y - b.plan.start.y);
  const bool outside = baseline::turns_outside(b.plan, s.domain);
  feasible = b.risk.value <= s.beta + s.solver.risk_tol && home <= s.solver.pos_tol;

  const ExposureTable table = exposure_table(trajs, pts, s.sensor);
  json j;
  j["planner"] = "boustrophedon";
  j["scenario_hash"] = io::fnv1a_hex(l.text);
  j["scenario"] = json::parse(scenario_to_json(l.config));
  j["vehicles"] = 1;
  j["beta"] = s.beta;
  j["path_time_s"] = path_time(b.plan);
  j["path_length_m"] = b.plan.length();
  j["spacing_m"] = b.plan.spacing;
  j["spacing_auto"] = b.spacing_auto;
  if (b.spacing_auto) {
    j["swath_halfwidth_m"] = b.swath_halfwidth;
    j["overlap"] = s.baseline.overlap;
  }
  j["pass_threshold"] = s.baseline.pass_threshold;
  j["legs"] = b.plan.legs;
  j["turn_radius_m"] = b.plan.turn_radius;
  j["start"] = {{"x_m", b.plan.start.x}, {"y_m", b.plan.start.y}, {"psi_rad", b.plan.start.psi}};
  j["risk"] = risk_json(b.risk, s.risk_mode);
  j["risk_paper_sum"] = risk_from_table(table, pts, RiskMode::PaperSum).value;
  j["risk_joint"] = risk_from_table(table, pts, RiskMode::JointExposure).value;
  j["terminal_distance_m"] = home;
  j["turns_outside_domain"] = outside;
  j["feasible"] = feasible;
  j["seed"] = s.qmc.seed;
  j["qmc"] = qmc_json(pts);
  j["coverage"] = coverage_json(grid);
  run.write_json(dir + "summary.json", j);
  return j;
}

void print_number(std::ostream& out, const char* label, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << label << buf << '\n';
}

int cmd_plan(const Options& opt, std::ostream& out) {
  Run run("plan", opt);
  const Loaded l = load(opt);
  const ValidatedScenario vs = validate_scenario(l.config);
  const QmcPointSet pts = points_for(*vs);
  const SolveResult r = solver::solve(vs, pts);
  write_plan(run, "", l, *vs, pts, r);
  const int code = r.converged ? kOk : kNotConverged;
  run.finish(vs->qmc.seed, code);
  print_number(out, "T_F [s]: ", r.t_final);
  print_number(out, ("risk (" + to_string(vs->risk_mode) + "): ").c_str(), r.risk.value);
  out << "feasible: " << (r.feasible ? "yes" : "no") << ", converged: " << (r.converged ? "yes" : "no") << '\n';
  return code;
}

ValidatedScenario single_vehicle(const ScenarioConfig& c, const char* command) {
  if (c.vehicles != 1) {
    throw UsageError(std::string(command) + " needs a single-vehicle scenario (got " + std::to_string(c.vehicles) +
                     " vehicles)");
  }
  return validate_scenario(c);
}

int cmd_baseline(const Options& opt, std::ostream& out) {
  Run run("baseline", opt);
  const Loaded l = load(opt);
  const ValidatedScenario vs = single_vehicle(l.config, "baseline");
  const QmcPointSet pts = points_for(*vs);
  const BaselineResult b = baseline::plan_boustrophedon(vs, pts);
  bool feasible = false;
  write_baseline(run, "", l, *vs, pts, b, feasible);
  const int code = feasible ? kOk : kNotConverged;
  run.finish(vs->qmc.seed, code);
  print_number(out, "path time [s]: ", path_time(b.plan));
  print_number(out, "spacing [m]: ", b.plan.spacing);
  out << "legs: " << b.plan.legs << '\n';
  print_number(out, ("risk (" + to_string(vs->risk_mode) + "): ").c_str(), b.risk.value);
  return code;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  Run run("compare", opt);
  const Loaded l = load(opt);
  const ValidatedScenario vs = single_vehicle(l.config, "compare");
  const QmcPointSet pts = points_for(*vs);
  const BaselineResult b = baseline::plan_boustrophedon(vs, pts);
  bool baseline_feasible = false;
  const json bj = write_baseline(run, "baseline/", l, *vs, pts, b, baseline_feasible);
  const SolveResult r = solver::solve(vs, pts);
  write_plan(run, "plan/", l, *vs, pts, r);

  const double t_base = path_time(b.plan);
  // Times below the planner's floor are not resolved; two idle plans compare as equal.
  const double floor = vs->solver.t_min;
  const double speedup = std::max(t_base, floor) / std::max(r.t_final, floor);
  std::string table = "planner,path_time_s,risk,feasible\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "boustrophedon,%.17g,%.17g,%d\n", t_base, b.risk.value, baseline_feasible ? 1 : 0);
  table += buf;
  std::snprintf(buf, sizeof buf, "optimal-control,%.17g,%.17g,%d\n", r.t_final, r.risk.value, r.feasible ? 1 : 0);
  table += buf;
  io::write_text(run.path("comparison.csv"), table);
  run.add("comparison.csv");

  json j;
  j["boustrophedon_path_time_s"] = t_base;
  j["optimal_path_time_s"] = r.t_final;
  j["speedup"] = speedup;
  j["boustrophedon_risk"] = b.risk.value;
  j["optimal_risk"] = r.risk.value;
  j["risk_mode"] = to_string(vs->risk_mode);
  j["boustrophedon_feasible"] = baseline_feasible;
  j["optimal_feasible"] = r.feasible;
  j["optimal_converged"] = r.converged;
  j["baseline_turns_outside_domain"] = bj["turns_outside_domain"];
  run.write_json("comparison.json", j);

  const int code = r.converged && baseline_feasible ? kOk : kNotConverged;
  run.finish(vs->qmc.seed, code);
  out << table;
  print_number(out, "speedup: ", speedup);
  return code;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  if (opt.k_max < 1) throw UsageError("--k-max must be at least 1");
  Run run("sweep", opt);
  Loaded l = load(opt);
  // Summed per-vehicle non-detection grows with k, so a sweep compares
  // vehicle counts under the joint reading unless asked otherwise.
  if (!opt.ov.risk_mode) l.config.risk_mode = RiskMode::JointExposure;
  if (!opt.ov.vehicles) l.config.vehicles = 1;
  l.config.starts.resize(1);
  const ValidatedScenario vs = validate_scenario(l.config);
  std::vector<std::size_t> ks(opt.k_max);
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = i + 1;
  const std::vector<SolveResult> results = solver::sweep_vehicles(vs, ks);
  const QmcPointSet pts = points_for(*vs);

  std::string table = "k,t_final_s,risk,risk_paper_sum,risk_joint,feasible,converged\n";
  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SolveResult& r = results[i];
    const Scenario sk = with_vehicle_count(*vs, ks[i]);
    ScenarioConfig ck = l.config;
    ck.vehicles = ks[i];
    const Loaded lk{l.text, ck};
    write_plan(run, "k" + std::to_string(ks[i]) + "/", lk, sk, pts, r);
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%d\n", ks[i], r.t_final, r.risk.value,
                  r.risk_paper_sum, r.risk_joint, r.feasible ? 1 : 0, r.converged ? 1 : 0);
    table += buf;
    all = all && r.converged;
  }
  io::write_text(run.path("sweep.csv"), table);
  run.add("sweep.csv");
  const int code = all ? kOk : kNotConverged;
  run.finish(vs->qmc.seed, code);
  out << table;
  return code;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
  const bool write = !opt.out.empty();
  std::optional<Run> run;
  if (write) run.emplace("evaluate", opt);
  const Loaded l = load(opt);
  const std::vector<Trajectory> trajs = io::read_trajectories(opt.trajectory);
  const ValidatedScenario vs = validate_scenario(l.config);
  const QmcPointSet pts = points_for(*vs);

  const ExposureTable table = exposure_table(trajs, pts, vs->sensor);
  const RiskEstimate risk = risk_from_table(table, pts, vs->risk_mode);
  const double paper_sum = risk_from_table(table, pts, RiskMode::PaperSum).value;
  const double joint = risk_from_table(table, pts, RiskMode::JointExposure).value;
  double e_min = std::numeric_limits<double>::infinity();
  double e_max = 0.0;
  double e_sum = 0.0;
  for (std::size_t p = 0; p < table.points; ++p) {
    double e = 0.0;
    for (std::size_t v = 0; v < table.vehicles; ++v) e += table.values[v * table.points + p];
    e_min = std::min(e_min, e);
    e_max = std::max(e_max, e);
    e_sum += e;
  }
  const double e_mean = e_sum / static_cast<double>(table.points);
  const CoverageGrid grid = coverage_grid(trajs, vs->domain, kCoverageCells, kCoverageCells, vs->sensor);

  out << "vehicles: " << trajs.size() << '\n';
  print_number(out, ("risk (" + to_string(vs->risk_mode) + "): ").c_str(), risk.value);
  print_number(out, "risk std error: ", risk.std_error);
  print_number(out, "risk (paper-sum): ", paper_sum);
  print_number(out, "risk (joint): ", joint);
  print_number(out, "exposure min: ", e_min);
  print_number(out, "exposure mean: ", e_mean);
  print_number(out, "exposure max: ", e_max);
  print_number(out, "coverage seen fraction: ", grid.seen_fraction());

  if (write) {
    json j;
    j["trajectory_hash"] = io::fnv1a_hex(io::read_text(opt.trajectory));
    j["scenario_hash"] = io::fnv1a_hex(l.text);
    j["vehicles"] = trajs.size();
    j["risk"] = risk_json(risk, vs->risk_mode);
    j["risk_paper_sum"] = paper_sum;
    j["risk_joint"] = joint;
    j["exposure"] = {{"min", e_min}, {"mean", e_mean}, {"max", e_max}};
    j["qmc"] = qmc_json(pts);
    j["coverage"] = coverage_json(grid);
    io::write_coverage(run->path("coverage.csv"), grid);
    run->add("coverage.csv");
    run->write_json("evaluation.json", j);
    run->finish(vs->qmc.seed, kOk);
  }
  return kOk;
}

void add_common(CLI::App* cmd, Options& opt, bool needs_out) {
  cmd->add_option("--scenario", opt.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  auto* o = cmd->add_option("--out", opt.out, "Output directory");
  if (needs_out) o->required();
  cmd->add_option("--seed", opt.ov.seed, "qMC seed");
  cmd->add_option("--risk", opt.ov.risk, "Residual risk threshold beta");
  cmd->add_option("--vehicles", opt.ov.vehicles, "Number of vehicles");
  cmd->add_option("--risk-mode", opt.ov.risk_mode, "paper-sum or joint")
      ->check(CLI::IsMember({"paper-sum", "joint"}));
  cmd->add_option("--nodes", opt.ov.nodes, "Rudder nodes per vehicle");
  cmd->add_option("--spacing", opt.ov.spacing, "Lawnmower track spacing in meters, or 'auto'");
  cmd->add_flag("-v,--verbose", opt.verbose, "Print solver progress to stderr");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Survey path planner for forward-looking sonar vehicles"};
  app.require_subcommand(1);
  Options opt;
  CLI::App* plan = app.add_subcommand("plan", "Minimum-time plan meeting the residual-risk target");
  CLI::App* base = app.add_subcommand("baseline", "Boustrophedon (lawnmower) reference plan");
  CLI::App* compare = app.add_subcommand("compare", "Run both planners and compare path times");
  CLI::App* sweep = app.add_subcommand("sweep", "Plans for 1..k_max vehicles");
  CLI::App* eval = app.add_subcommand("evaluate", "Residual risk of a trajectory file");
  add_common(plan, opt, true);
  add_common(base, opt, true);
  add_common(compare, opt, true);
  add_common(sweep, opt, true);
  sweep->add_option("--k-max", opt.k_max, "Largest vehicle count")->capture_default_str();
  add_common(eval, opt, false);
  eval->add_option("--trajectory", opt.trajectory, "Trajectory table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  if (opt.verbose) solver::set_progress_sink([&err](const std::string& line) { err << line << std::endl; });
  struct Reset {
    ~Reset() { solver::set_progress_sink({}); }
  } reset;

  try {
    if (plan->parsed()) return cmd_plan(opt, out);
    if (base->parsed()) return cmd_baseline(opt, out);
    if (compare->parsed()) return cmd_compare(opt, out);
    if (sweep->parsed()) return cmd_sweep(opt, out);
    return cmd_evaluate(opt, out);
  } catch (const ScenarioError& e) {
    err << "error: invalid scenario '" << opt.scenario << "'\n";
    for (const std::string& d : e.diagnostics()) err << "  " << d << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kError;
}

}  // namespace mcmplan::cli
