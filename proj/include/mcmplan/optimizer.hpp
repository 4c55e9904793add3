#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mcmplan::optim {

/// f(x), writing the gradient into g.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;
/// Maps a point onto the feasible set in place.
using Projection = std::function<void(std::vector<double>& x)>;

struct LbfgsOptions {
  std::size_t max_iterations = 100;
  std::size_t memory = 8;
  double gradient_tol = 1e-6;  // on the projected gradient, infinity norm
  double f_rel_tol = 1e-10;    // stop after 3 iterations with smaller relative decrease
  double initial_step = 0.05;  // infinity norm of the first step
  double max_step = 1.0;       // infinity-norm cap on any step
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> g;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with projection onto the feasible set after each
/// step and Armijo backtracking along the projected path.
LbfgsResult minimize_lbfgs(const Objective& f, std::vector<double> x0, const Projection& project,
                           const LbfgsOptions& opt);

}  // namespace mcmplan::optim
