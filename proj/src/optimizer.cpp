#include "mcmplan/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace mcmplan::optim {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

std::vector<double> two_loop(const std::deque<Pair>& mem, const std::vector<double>& g) {
  std::vector<double> q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * dot(mem[i].s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * mem[i].y[j];
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * dot(mem[i].y, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * mem[i].s[j];
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, std::vector<double> x0, const Projection& project,
                           const LbfgsOptions& opt) {
  LbfgsResult res;
  if (project) project(x0);
  res.x = std::move(x0);
  res.f = f(res.x, res.g);
  res.evaluations = 1;

  std::deque<Pair> mem;
  std::vector<double> trial(res.x.size());
  std::vector<double> g_trial;
  int stalled = 0;

  for (res.iterations = 0; res.iterations < opt.max_iterations;) {
    std::vector<double> pg(res.x.size());
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] = res.x[i] - res.g[i];
    if (project) project(pg);
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] -= res.x[i];
    if (inf_norm(pg) <= opt.gradient_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> d = two_loop(mem, res.g);
    if (dot(d, res.g) >= 0.0) {
      mem.clear();
      d = two_loop(mem, res.g);
    }
    const double dn = inf_norm(d);
    if (dn == 0.0) {
      res.converged = true;
      break;
    }
    double alpha = mem.empty() ? opt.initial_step / dn : 1.0;
    alpha = std::min(alpha, opt.max_step / dn);

    bool accepted = false;
    double f_trial = 0.0;
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = res.x[i] + alpha * d[i];
      if (project) project(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < trial.size(); ++i) decrease += res.g[i] * (trial[i] - res.x[i]);
      f_trial = f(trial, g_trial);
      ++res.evaluations;
      if (std::isfinite(f_trial) && f_trial <= res.f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++res.iterations;
    if (!accepted) {
      if (mem.empty()) break;
      mem.clear();
      continue;
    }

    Pair p;
    p.s.resize(trial.size());
    p.y.resize(trial.size());
    for (std::size_t i = 0; i < trial.size(); ++i) {
      p.s[i] = trial[i] - res.x[i];
      p.y[i] = g_trial[i] - res.g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (mem.size() > opt.memory) mem.pop_front();
    }

    const double gain = res.f - f_trial;
    res.x = trial;
    res.f = f_trial;
    res.g = g_trial;
    stalled = gain <= opt.f_rel_tol * std::max(1.0, std::abs(res.f)) ? stalled + 1 : 0;
    if (stalled >= 3) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mcmplan::optim
