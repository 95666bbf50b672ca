#pragma once

#include <functional>
#include <vector>

namespace hgmix {

struct SimplexOptions {
  int max_iter = 4000;
  double f_tol = 1e-10;   // convergence on objective spread
  double x_tol = 1e-9;    // convergence on simplex size
  double initial_step = 0.5;
};

struct SimplexResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_abs_x = 0.0;  // largest |coordinate| visited, for boundary detection
};

using Objective = std::function<double(const std::vector<double>&)>;

// Nelder-Mead simplex minimization. Objectives may return +inf/NaN outside
// their domain; such vertices are treated as worst.
SimplexResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                          const SimplexOptions& opts = {});

// Minimizes over a deterministic grid of starting points, returns the best run.
SimplexResult multi_start_nelder_mead(const Objective& f,
                                      const std::vector<std::vector<double>>& starts,
                                      const SimplexOptions& opts = {});

// Central-difference Hessian of f at x with per-coordinate relative steps.
std::vector<std::vector<double>> fd_hessian(const Objective& f, const std::vector<double>& x,
                                            double rel_step = 1e-4);

}  // namespace hgmix
