#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcmplan/exposure_kernel.hpp"
#include "mcmplan/solver.hpp"

namespace mcmplan {

bool ConstraintValues::feasible(double beta, const TranscriptionConfig& c) const {
  if (risk > beta + c.risk_tol) return false;
  return std::all_of(terminal_distance.begin(), terminal_distance.end(),
                     [&c](double v) { return v <= c.pos_tol; });
}

namespace solver {
namespace {

struct Rate {
  double x, y, psi, r;
};

// Unscaled rates f(z, d); the normalized-time right-hand side is T_F f.
inline Rate rates(const VehicleState& z, double d, const VehicleParams& p) {
  return {p.speed * std::cos(z.psi), p.speed * std::sin(z.psi), z.r, (p.gain * d - z.r) / p.time_constant};
}

inline VehicleState advance(const VehicleState& z, const Rate& k, double h) {
  return {z.x + h * k.x, z.y + h * k.y, z.psi + h * k.psi, z.r + h * k.r};
}

inline Rate scaled(const Rate& f, double tf) { return {tf * f.x, tf * f.y, tf * f.psi, tf * f.r}; }

// Rudder at normalized time s as the node pair it interpolates.
struct Interp {
  std::size_t j;
  double w;
};

inline Interp locate(double s, std::size_t n) {
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(n - 1);
  auto j = static_cast<std::size_t>(pos);
  if (j >= n - 1) j = n - 2;
  return {j, pos - static_cast<double>(j)};
}

inline double rudder_at(const double* d, std::size_t n, double s) {
  const Interp q = locate(s, n);
  return (1.0 - q.w) * d[q.j] + q.w * d[q.j + 1];
}

inline void scatter(double* bar, std::size_t n, double s, double value) {
  const Interp q = locate(s, n);
  bar[q.j] += (1.0 - q.w) * value;
  bar[q.j + 1] += q.w * value;
}

}  // namespace

Grid make_grid(double t_final, const TranscriptionConfig& c) {
  Grid g;
  // Samples come in whole multiples of the node intervals so that every rudder
  // node lies on a step boundary; RK4 then sees a smooth input on each step.
  const double per_node = static_cast<double>(std::max<std::size_t>(1, c.n_nodes - 1));
  g.samples = static_cast<std::size_t>(per_node * std::max(1.0, std::ceil(t_final / (c.sample_dt * per_node) - 1e-9)));
  const double interval = t_final / static_cast<double>(g.samples);
  g.stride = static_cast<std::size_t>(std::max(1.0, std::ceil(interval / c.dt_sim - 1e-9)));
  return g;
}

Transcription::Transcription(const Scenario& s, const QmcPointSet& pts, Grid grid)
    : s_(s), pts_(pts), grid_(grid), terminal_scale_(0.01 * std::sqrt(domain_area(s.domain))) {}

void Transcription::forward(const DecisionVector& dv, std::size_t v, std::vector<VehicleState>& z) const {
  const std::size_t n = nodes();
  const std::size_t m = grid_.steps();
  const double* d = dv.rudder.data() + v * n;
  const double tf = dv.t_final;
  const double h = 1.0 / static_cast<double>(m);
  const VehicleParams& p = s_.vehicle;
  z.resize(m + 1);
  z[0] = {s_.starts[v].x, s_.starts[v].y, s_.starts[v].psi, 0.0};
  for (std::size_t i = 0; i < m; ++i) {
    const double s = static_cast<double>(i) * h;
    const double d1 = rudder_at(d, n, s);
    const double d2 = rudder_at(d, n, s + 0.5 * h);
    const double d4 = rudder_at(d, n, s + h);
    const VehicleState& z1 = z[i];
    const Rate k1 = scaled(rates(z1, d1, p), tf);
    const Rate k2 = scaled(rates(advance(z1, k1, 0.5 * h), d2, p), tf);
    const Rate k3 = scaled(rates(advance(z1, k2, 0.5 * h), d2, p), tf);
    const Rate k4 = scaled(rates(advance(z1, k3, h), d4, p), tf);
    const double w = h / 6.0;
    z[i + 1] = {z1.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                z1.y + w * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
                z1.psi + w * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
                z1.r + w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r)};
    if (!std::isfinite(z[i + 1].x) || !std::isfinite(z[i + 1].y) || !std::isfinite(z[i + 1].psi) ||
        !std::isfinite(z[i + 1].r)) {
      throw std::runtime_error("transcription: integration produced a non-finite state");
    }
  }
}

// Reverse sweep through the RK4 steps. injections[i] is d(objective)/d z_i
// from terms that read state i directly; terminal_seed is added at the last
// state. Accumulates into tf_bar and rudder_bar (n_nodes entries).
void Transcription::adjoint(const DecisionVector& dv, std::size_t v, const std::vector<VehicleState>& z,
                            const std::vector<VehicleState>& injections, VehicleState terminal_seed, double& tf_bar,
                            double* rudder_bar) const {
  const std::size_t n = nodes();
  const std::size_t m = grid_.steps();
  const double* d = dv.rudder.data() + v * n;
  const double tf = dv.t_final;
  const double h = 1.0 / static_cast<double>(m);
  const VehicleParams& p = s_.vehicle;
  const double V = p.speed;
  const double inv_T = 1.0 / p.time_constant;
  const double rudder_gain = tf * p.gain * inv_T;

  const auto inject = [&injections](std::size_t i, VehicleState& a) {
    if (injections.empty()) return;
    const VehicleState& g = injections[i];
    a.x += g.x;
    a.y += g.y;
    a.psi += g.psi;
    a.r += g.r;
  };
  // (T_F J_f(z))^T b: only psi and r receive contributions.
  const auto jt = [&](const VehicleState& zs, const Rate& b) {
    return VehicleState{0.0, 0.0, tf * V * (-std::sin(zs.psi) * b.x + std::cos(zs.psi) * b.y),
                        tf * (b.psi - inv_T * b.r)};
  };
  const auto dot = [](const Rate& f, const Rate& b) { return f.x * b.x + f.y * b.y + f.psi * b.psi + f.r * b.r; };
  const auto add = [](Rate& a, const VehicleState& b, double c) {
    a.x += c * b.x;
    a.y += c * b.y;
    a.psi += c * b.psi;
    a.r += c * b.r;
  };

  VehicleState a = terminal_seed;
  inject(m, a);
  for (std::size_t i = m; i-- > 0;) {
    const double s = static_cast<double>(i) * h;
    const double d1 = rudder_at(d, n, s);
    const double d2 = rudder_at(d, n, s + 0.5 * h);
    const double d4 = rudder_at(d, n, s + h);
    const VehicleState& z1 = z[i];
    const Rate f1 = rates(z1, d1, p);
    const VehicleState z2 = advance(z1, scaled(f1, tf), 0.5 * h);
    const Rate f2 = rates(z2, d2, p);
    const VehicleState z3 = advance(z1, scaled(f2, tf), 0.5 * h);
    const Rate f3 = rates(z3, d2, p);
    const VehicleState z4 = advance(z1, scaled(f3, tf), h);
    const Rate f4 = rates(z4, d4, p);

    const double c1 = h / 6.0;
    const double c2 = h / 3.0;
    Rate k1b{c1 * a.x, c1 * a.y, c1 * a.psi, c1 * a.r};
    Rate k2b{c2 * a.x, c2 * a.y, c2 * a.psi, c2 * a.r};
    Rate k3b = k2b;
    const Rate k4b = k1b;
    VehicleState zb = a;
    double d1b = 0.0;
    double d2b = 0.0;
    double d4b = 0.0;

    tf_bar += dot(f4, k4b);
    d4b += rudder_gain * k4b.r;
    const VehicleState z4b = jt(z4, k4b);
    add(k3b, z4b, h);

    tf_bar += dot(f3, k3b);
    d2b += rudder_gain * k3b.r;
    const VehicleState z3b = jt(z3, k3b);
    add(k2b, z3b, 0.5 * h);

    tf_bar += dot(f2, k2b);
    d2b += rudder_gain * k2b.r;
    const VehicleState z2b = jt(z2, k2b);
    add(k1b, z2b, 0.5 * h);

    tf_bar += dot(f1, k1b);
    d1b += rudder_gain * k1b.r;
    const VehicleState z1b = jt(z1, k1b);

    zb.psi += z4b.psi + z3b.psi + z2b.psi + z1b.psi;
    zb.r += z4b.r + z3b.r + z2b.r + z1b.r;

    scatter(rudder_bar, n, s, d1b);
    scatter(rudder_bar, n, s + 0.5 * h, d2b);
    scatter(rudder_bar, n, s + h, d4b);

    a = zb;
    inject(i, a);
  }
}

std::vector<Trajectory> Transcription::integrate(const DecisionVector& dv) const {
  std::vector<Trajectory> out(vehicles());
  const std::size_t n = nodes();
  const double h = 1.0 / static_cast<double>(grid_.steps());
  for (std::size_t v = 0; v < vehicles(); ++v) {
    forward(dv, v, out[v].states);
    out[v].dt = dv.t_final * h;
    out[v].rudder.resize(out[v].states.size());
    for (std::size_t i = 0; i < out[v].states.size(); ++i) {
      out[v].rudder[i] = rudder_at(dv.rudder.data() + v * n, n, static_cast<double>(i) * h);
    }
  }
  return out;
}

std::vector<Trajectory> Transcription::sampled(const DecisionVector& dv) const {
  std::vector<Trajectory> full = integrate(dv);
  for (auto& t : full) t = dynamics::decimate(t, grid_.stride);
  return full;
}

ConstraintValues Transcription::constraints(const DecisionVector& dv, RiskEstimate* risk) const {
  ConstraintValues cv;
  merit(dv, AlState{}, nullptr, &cv, risk);
  return cv;
}

double Transcription::merit(const DecisionVector& dv, const AlState& al, std::vector<double>* grad,
                            ConstraintValues* cv, RiskEstimate* risk_out) const {
  const std::size_t k = vehicles();
  const std::size_t n = nodes();
  if (dv.rudder.size() != k * n) throw std::invalid_argument("transcription: wrong number of rudder values");
  if (!(dv.t_final > 0.0)) throw std::invalid_argument("transcription: T_F must be positive");

  const std::size_t samples = grid_.samples;
  const std::size_t stride = grid_.stride;
  const double tf = dv.t_final;
  const std::vector<double> w = risk::trapezoid_weights(samples + 1, tf / static_cast<double>(samples));
  const std::size_t np = pts_.size();
  const Domain& dom = s_.domain;
  const bool contain = s_.solver.containment == Containment::Penalty;

  std::vector<std::vector<VehicleState>> z(k);
  ExposureTable table;
  table.vehicles = k;
  table.points = np;
  table.values.assign(k * np, 0.0);
  double containment = 0.0;
  std::vector<Vec2> offset(k);
  for (std::size_t v = 0; v < k; ++v) {
    forward(dv, v, z[v]);
    double* e = table.values.data() + v * np;
    for (std::size_t m = 0; m <= samples; ++m) {
      const VehicleState& st = z[v][m * stride];
      if (w[m] != 0.0) {
        kernel::accumulate_rates(s_.sensor, pts_.x.data(), pts_.y.data(), np,
                                 {st.x, st.y, std::cos(st.psi), std::sin(st.psi)}, w[m], e);
      }
      if (contain) {
        const double dist = distance_outside(dom, {st.x, st.y});
        containment += w[m] * dist * dist;
      }
    }
    const VehicleState& last = z[v].back();
    offset[v] = {last.x - s_.starts[v].x, last.y - s_.starts[v].y};
  }
  const RiskEstimate est = risk_from_table(table, pts_, s_.risk_mode);
  const double risk = est.value;
  if (risk_out) *risk_out = est;

  const double g = (risk - s_.beta) / kRiskScale;
  const double shifted = std::max(0.0, al.lambda_risk + al.mu * g);
  double value = tf + al.t_ref * (shifted * shifted - al.lambda_risk * al.lambda_risk) / (2.0 * al.mu);
  const double hs = terminal_scale_;
  for (std::size_t v = 0; v < k; ++v) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double hv = (c == 0 ? offset[v].x : offset[v].y) / hs;
      const double lam = al.lambda_terminal.empty() ? 0.0 : al.lambda_terminal[2 * v + c];
      value += al.t_ref * (lam * hv + 0.5 * al.mu * hv * hv);
    }
  }
  const double wc = contain ? s_.solver.containment_weight : 0.0;
  value += wc * containment;

  if (cv) {
    cv->risk = risk;
    cv->risk_violation = std::max(0.0, risk - s_.beta);
    cv->terminal_distance.resize(k);
    cv->terminal_violation.resize(k);
    for (std::size_t v = 0; v < k; ++v) {
      cv->terminal_distance[v] = norm(offset[v]);
      cv->terminal_violation[v] = std::max(0.0, cv->terminal_distance[v] - s_.solver.pos_tol);
    }
    cv->containment_penalty = contain ? containment : 0.0;
  }
  if (!grad) return value;

  // d merit / d risk, then d risk / d E(v, p) for every table entry.
  const double risk_bar = al.t_ref * shifted / kRiskScale;
  const double scale = risk_bar / static_cast<double>(np);
  std::vector<double> coeff(k * np);
  for (std::size_t p = 0; p < np; ++p) {
    if (s_.risk_mode == RiskMode::PaperSum) {
      for (std::size_t v = 0; v < k; ++v) coeff[v * np + p] = -scale * std::exp(-table.values[v * np + p]);
    } else {
      double total = 0.0;
      for (std::size_t v = 0; v < k; ++v) total += table.values[v * np + p];
      const double c = -scale * std::exp(-total);
      for (std::size_t v = 0; v < k; ++v) coeff[v * np + p] = c;
    }
  }

  grad->assign(1 + k * n, 0.0);
  double tf_bar = 1.0;
  std::vector<VehicleState> inj(grid_.steps() + 1);
  for (std::size_t v = 0; v < k; ++v) {
    std::fill(inj.begin(), inj.end(), VehicleState{});
    const double* c = coeff.data() + v * np;
    const double* e = table.values.data() + v * np;
    // Exposure weights are proportional to T_F.
    if (risk_bar != 0.0) {
      double direct = 0.0;
      for (std::size_t p = 0; p < np; ++p) direct += c[p] * e[p];
      tf_bar += direct / tf;
    }
    double cont_direct = 0.0;
    for (std::size_t m = 0; m <= samples; ++m) {
      const VehicleState& st = z[v][m * stride];
      VehicleState& g_m = inj[m * stride];
      if (risk_bar != 0.0 && w[m] != 0.0) {
        const auto pg = kernel::weighted_rate_gradient(s_.sensor, pts_.x.data(), pts_.y.data(), c, np,
                                                       {st.x, st.y, std::cos(st.psi), std::sin(st.psi)});
        g_m.x += w[m] * pg.x;
        g_m.y += w[m] * pg.y;
        g_m.psi += w[m] * pg.psi;
      }
      if (wc != 0.0) {
        Vec2 dgrad;
        const double dist = distance_outside(dom, {st.x, st.y}, &dgrad);
        if (dist > 0.0) {
          g_m.x += wc * w[m] * 2.0 * dist * dgrad.x;
          g_m.y += wc * w[m] * 2.0 * dist * dgrad.y;
          cont_direct += wc * w[m] * dist * dist;
        }
      }
    }
    tf_bar += cont_direct / tf;

    VehicleState seed{};
    for (std::size_t cc = 0; cc < 2; ++cc) {
      const double hv = (cc == 0 ? offset[v].x : offset[v].y) / hs;
      const double lam = al.lambda_terminal.empty() ? 0.0 : al.lambda_terminal[2 * v + cc];
      const double bar = al.t_ref * (lam + al.mu * hv) / hs;
      (cc == 0 ? seed.x : seed.y) = bar;
    }
    adjoint(dv, v, z[v], inj, seed, tf_bar, grad->data() + 1 + v * n);
  }
  (*grad)[0] = tf_bar;
  return value;
}

void Transcription::terminal_jacobian(const DecisionVector& dv, std::size_t vehicle, Vec2& offset,
                                      std::vector<double>& jx, std::vector<double>& jy) const {
  const std::size_t n = nodes();
  std::vector<VehicleState> z;
  forward(dv, vehicle, z);
  offset = {z.back().x - s_.starts[vehicle].x, z.back().y - s_.starts[vehicle].y};
  double tf_bar = 0.0;
  jx.assign(n, 0.0);
  jy.assign(n, 0.0);
  adjoint(dv, vehicle, z, {}, VehicleState{1.0, 0.0, 0.0, 0.0}, tf_bar, jx.data());
  adjoint(dv, vehicle, z, {}, VehicleState{0.0, 1.0, 0.0, 0.0}, tf_bar, jy.data());
}

std::vector<Trajectory> transcribe(const DecisionVector& dv, const Scenario& s) {
  const QmcPointSet none;
  return Transcription(s, none, make_grid(dv.t_final, s.solver)).integrate(dv);
}

ConstraintValues evaluate_constraints(const DecisionVector& dv, const Scenario& s, const QmcPointSet& pts) {
  return Transcription(s, pts, make_grid(dv.t_final, s.solver)).constraints(dv);
}

ConstraintValues evaluate_constraints(const DecisionVector& dv, const Scenario& s) {
  const QmcPointSet pts = generate_qmc_points(s.qmc.points, s.qmc.shifts, s.qmc.seed, s.domain);
  return evaluate_constraints(dv, s, pts);
}

std::vector<double> gradient(const DecisionVector& dv, const Scenario& s, const QmcPointSet& pts,
                             const AlState& al) {
  std::vector<double> g;
  Transcription(s, pts, make_grid(dv.t_final, s.solver)).merit(dv, al, &g);
  return g;
}

std::vector<ControlSchedule> schedules(const DecisionVector& dv, std::size_t k, std::size_t n_nodes) {
  std::vector<ControlSchedule> out(k);
  for (std::size_t v = 0; v < k; ++v) {
    for (std::size_t j = 0; j < n_nodes; ++j) {
      out[v].node_times.push_back(dv.t_final * static_cast<double>(j) / static_cast<double>(n_nodes - 1));
      out[v].rudder.push_back(dv.rudder[v * n_nodes + j]);
    }
    out[v].node_times.back() = dv.t_final;
  }
  return out;
}

}  // namespace solver
}  // namespace mcmplan
