#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mcmplan/scenario.hpp"

namespace mcmplan {
namespace {

using nlohmann::json;

// Reads the members of one object, rejecting unknown keys and wrong types.
class Section {
 public:
  Section(const json& j, std::string name, std::vector<std::string>& errs)
      : j_(j), name_(std::move(name)), errs_(errs) {
    if (!j_.is_object()) errs_.push_back(name_ + ": must be an object");
  }

  ~Section() {
    if (!j_.is_object()) return;
    for (const auto& [key, _] : j_.items()) {
      if (!known_.contains(key)) errs_.push_back(name_ + ": unknown key '" + key + "'");
    }
  }

  const json* find(const std::string& key) {
    known_.insert(key);
    if (!j_.is_object()) return nullptr;
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else errs_.push_back(name_ + "." + key + ": expected a number");
    }
  }

  template <class Int>
  void count(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<Int>();
      else errs_.push_back(name_ + "." + key + ": expected a non-negative integer");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else errs_.push_back(name_ + "." + key + ": expected a string");
    }
  }

  void error(const std::string& key, const std::string& msg) { errs_.push_back(name_ + "." + key + ": " + msg); }

 private:
  const json& j_;
  std::string name_;
  std::vector<std::string>& errs_;
  std::set<std::string> known_;
};

bool read_point(const json& v, Vec2& out) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) return false;
  out = {v[0].get<double>(), v[1].get<double>()};
  return true;
}

void parse_domain(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "domain", errs);
  if (const json* v = s.find("vertices")) {
    bool ok = v->is_array() && v->size() == 4;
    for (std::size_t i = 0; ok && i < 4; ++i) ok = read_point((*v)[i], c.vertices[i]);
    if (!ok) s.error("vertices", "expected four [x, y] pairs");
  } else {
    s.error("vertices", "missing");
  }
  s.number("length_unit_m", c.length_unit);
}

void parse_sensor(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "sensor", errs);
  s.number("lambda_per_s", c.lambda);
  s.number("fom_db", c.fom);
  s.number("attenuation_db_per_km", c.attenuation);
  s.number("sigma_db", c.sigma);
  s.number("alpha_fov_deg", c.alpha_fov_deg);
  s.number("eps_fov_deg", c.eps_fov_deg);
  s.number("eps_de_deg", c.eps_de_deg);
  s.number("p_alpha", c.p_alpha);
  s.number("p_eps", c.p_eps);
  s.number("height_m", c.height);
  s.number("r_min_m", c.r_min);
}

void parse_vehicle(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "vehicle", errs);
  s.number("speed_m_s", c.speed);
  s.number("gain_per_s", c.gain);
  s.number("time_constant_s", c.time_constant);
}

void parse_mission(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "mission", errs);
  s.count("vehicles", c.vehicles);
  s.number("beta", c.beta);
  std::string mode;
  s.text("risk_mode", mode);
  if (!mode.empty()) {
    try {
      c.risk_mode = risk_mode_from_string(mode);
    } catch (const std::invalid_argument& e) {
      s.error("risk_mode", e.what());
    }
  }
  if (const json* v = s.find("starts")) {
    bool ok = v->is_array() && !v->empty();
    c.starts.clear();
    for (std::size_t i = 0; ok && i < v->size(); ++i) {
      const json& e = (*v)[i];
      ok = e.is_array() && (e.size() == 2 || e.size() == 3);
      for (std::size_t q = 0; ok && q < e.size(); ++q) ok = e[q].is_number();
      if (ok) c.starts.push_back({e[0].get<double>(), e[1].get<double>(), e.size() == 3 ? e[2].get<double>() : 0.0});
    }
    if (!ok) s.error("starts", "expected a non-empty list of [x, y] or [x, y, heading_deg]");
  } else {
    s.error("starts", "missing");
  }
}

void parse_qmc(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "qmc", errs);
  s.count("points", c.qmc.points);
  s.count("shifts", c.qmc.shifts);
  s.count("seed", c.qmc.seed);
}

void parse_solver(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "solver", errs);
  auto& t = c.solver;
  s.count("nodes", t.n_nodes);
  s.number("dt_sim_s", t.dt_sim);
  s.number("sample_dt_s", t.sample_dt);
  s.number("d_max_deg", c.d_max_deg);
  s.number("risk_tol", t.risk_tol);
  s.number("pos_tol_m", t.pos_tol);
  s.count("max_outer", t.max_outer);
  s.count("max_inner", t.max_inner);
  s.number("penalty_init", t.penalty_init);
  s.number("penalty_growth", t.penalty_growth);
  std::string init;
  s.text("init", init);
  if (init == "lawnmower") t.init_strategy = InitStrategy::Lawnmower;
  else if (init == "spiral") t.init_strategy = InitStrategy::Spiral;
  else if (init == "random") t.init_strategy = InitStrategy::Random;
  else if (!init.empty()) s.error("init", "expected lawnmower, spiral or random");
  s.count("n_starts", t.n_starts);
  s.count("inner_shifts", t.inner_shifts);
  std::string containment;
  s.text("containment", containment);
  if (containment == "off") t.containment = Containment::Off;
  else if (containment == "penalty") t.containment = Containment::Penalty;
  else if (!containment.empty()) s.error("containment", "expected off or penalty");
  s.number("containment_weight", t.containment_weight);
  s.number("t_min_s", t.t_min);
  s.number("t_max_s", t.t_max);
}

void parse_baseline(const json& j, ScenarioConfig& c, std::vector<std::string>& errs) {
  Section s(j, "baseline", errs);
  auto& b = c.baseline;
  s.number("pass_threshold", b.pass_threshold);
  s.number("overlap", b.overlap);
  if (const json* v = s.find("spacing_m")) {
    if (v->is_number()) b.spacing = v->get<double>();
    else if (!(v->is_string() && v->get<std::string>() == "auto")) s.error("spacing_m", "expected a number or \"auto\"");
  }
  if (const json* v = s.find("start")) {
    Vec2 p;
    if (read_point(*v, p)) b.start = p;
    else if (!(v->is_string() && v->get<std::string>() == "auto")) s.error("start", "expected [x, y] or \"auto\"");
  }
  s.number("lead_in_m", b.lead_in);
  s.count("max_legs", b.max_legs);
  s.number("dt_s", b.dt);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("scenario is not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ScenarioError({"scenario must be a JSON object"});

  ScenarioConfig c;
  std::vector<std::string> errs;
  using Parser = void (*)(const json&, ScenarioConfig&, std::vector<std::string>&);
  const std::pair<const char*, Parser> required[] = {
      {"domain", parse_domain}, {"sensor", parse_sensor}, {"vehicle", parse_vehicle}, {"mission", parse_mission}};
  const std::pair<const char*, Parser> optional[] = {
      {"qmc", parse_qmc}, {"solver", parse_solver}, {"baseline", parse_baseline}};
  std::set<std::string> known;
  for (const auto& [name, parse] : required) {
    known.insert(name);
    if (auto it = root.find(name); it != root.end()) parse(*it, c, errs);
    else errs.push_back(std::string("missing required section '") + name + "'");
  }
  for (const auto& [name, parse] : optional) {
    known.insert(name);
    if (auto it = root.find(name); it != root.end()) parse(*it, c, errs);
  }
  for (const auto& [key, _] : root.items()) {
    if (!known.contains(key)) errs.push_back("unknown section '" + key + "'");
  }
  if (!errs.empty()) throw ScenarioError(std::move(errs));
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot read scenario file '" + path + "'"});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json j;
  json verts = json::array();
  for (const auto& v : c.vertices) verts.push_back({v.x, v.y});
  j["domain"] = {{"vertices", verts}, {"length_unit_m", c.length_unit}};
  j["sensor"] = {{"lambda_per_s", c.lambda},       {"fom_db", c.fom},
                 {"attenuation_db_per_km", c.attenuation}, {"sigma_db", c.sigma},
                 {"alpha_fov_deg", c.alpha_fov_deg}, {"eps_fov_deg", c.eps_fov_deg},
                 {"eps_de_deg", c.eps_de_deg},     {"p_alpha", c.p_alpha},
                 {"p_eps", c.p_eps},               {"height_m", c.height},
                 {"r_min_m", c.r_min}};
  j["vehicle"] = {{"speed_m_s", c.speed}, {"gain_per_s", c.gain}, {"time_constant_s", c.time_constant}};
  json starts = json::array();
  for (const auto& s : c.starts) starts.push_back({s.x, s.y, s.heading_deg});
  j["mission"] = {{"vehicles", c.vehicles}, {"beta", c.beta}, {"risk_mode", to_string(c.risk_mode)}, {"starts", starts}};
  j["qmc"] = {{"points", c.qmc.points}, {"shifts", c.qmc.shifts}, {"seed", c.qmc.seed}};
  const auto& t = c.solver;
  j["solver"] = {{"nodes", t.n_nodes},
                 {"dt_sim_s", t.dt_sim},
                 {"sample_dt_s", t.sample_dt},
                 {"d_max_deg", c.d_max_deg},
                 {"risk_tol", t.risk_tol},
                 {"pos_tol_m", t.pos_tol},
                 {"max_outer", t.max_outer},
                 {"max_inner", t.max_inner},
                 {"penalty_init", t.penalty_init},
                 {"penalty_growth", t.penalty_growth},
                 {"init", to_string(t.init_strategy)},
                 {"n_starts", t.n_starts},
                 {"inner_shifts", t.inner_shifts},
                 {"containment", to_string(t.containment)},
                 {"containment_weight", t.containment_weight},
                 {"t_min_s", t.t_min},
                 {"t_max_s", t.t_max}};
  const auto& b = c.baseline;
  j["baseline"] = {{"pass_threshold", b.pass_threshold},
                   {"overlap", b.overlap},
                   {"lead_in_m", b.lead_in},
                   {"max_legs", b.max_legs},
                   {"dt_s", b.dt}};
  j["baseline"]["spacing_m"] = b.spacing ? json(*b.spacing) : json("auto");
  j["baseline"]["start"] = b.start ? json{b.start->x, b.start->y} : json("auto");
  return j.dump(2);
}

}  // namespace mcmplan
