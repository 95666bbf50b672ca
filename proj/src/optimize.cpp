#include "hgmix/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hgmix {

namespace {

double guarded(const Objective& f, const std::vector<double>& x, double& max_abs) {
  for (double v : x) max_abs = std::max(max_abs, std::fabs(v));
  double v;
  try {
    v = f(x);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  // -inf objectives are always broken evaluations, never real optima
  if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
  return v;
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                          const SimplexOptions& opts) {
  const size_t n = x0.size();
  SimplexResult out;
  out.x = x0;
  if (n == 0) {
    out.fmin = guarded(f, x0, out.max_abs_x);
    out.converged = true;
    return out;
  }
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (size_t i = 0; i < n; ++i)
    simplex[i + 1][i] += (x0[i] != 0.0 ? opts.initial_step * std::fabs(x0[i]) : 0.0) + opts.initial_step;
  for (size_t i = 0; i <= n; ++i) fx[i] = guarded(f, simplex[i], out.max_abs_x);

  std::vector<size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  for (out.iterations = 0; out.iterations < opts.max_iter; ++out.iterations) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fx[a] < fx[b]; });
    const size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    double size = 0.0;
    for (size_t i = 0; i <= n; ++i)
      for (size_t j = 0; j < n; ++j)
        size = std::max(size, std::fabs(simplex[i][j] - simplex[best][j]));
    const double fspread = std::isfinite(fx[worst]) ? fx[worst] - fx[best]
                                                    : std::numeric_limits<double>::infinity();
    if ((fspread <= opts.f_tol && size <= opts.x_tol) || size <= 1e-14) {
      out.converged = true;
      break;
    }

    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t i = 0; i <= n; ++i)
        if (i != worst) s += simplex[i][j];
      centroid[j] = s / n;
    }
    for (size_t j = 0; j < n; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - simplex[worst][j]);
    const double fr = guarded(f, xr, out.max_abs_x);

    if (fr < fx[best]) {
      for (size_t j = 0; j < n; ++j) xe[j] = centroid[j] + gamma * (xr[j] - centroid[j]);
      const double fe = guarded(f, xe, out.max_abs_x);
      if (fe < fr) { simplex[worst] = xe; fx[worst] = fe; }
      else { simplex[worst] = xr; fx[worst] = fr; }
    } else if (fr < fx[second_worst]) {
      simplex[worst] = xr;
      fx[worst] = fr;
    } else {
      const bool outside = fr < fx[worst];
      if (outside)
        for (size_t j = 0; j < n; ++j) xc[j] = centroid[j] + rho * (xr[j] - centroid[j]);
      else
        for (size_t j = 0; j < n; ++j) xc[j] = centroid[j] + rho * (simplex[worst][j] - centroid[j]);
      const double fc = guarded(f, xc, out.max_abs_x);
      if (fc < std::min(fr, fx[worst])) {
        simplex[worst] = xc;
        fx[worst] = fc;
      } else {
        for (size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[best][j] + sigma * (simplex[i][j] - simplex[best][j]);
          fx[i] = guarded(f, simplex[i], out.max_abs_x);
        }
      }
    }
  }
  const size_t best = static_cast<size_t>(
      std::min_element(fx.begin(), fx.end()) - fx.begin());
  out.x = simplex[best];
  out.fmin = fx[best];
  return out;
}

SimplexResult multi_start_nelder_mead(const Objective& f,
                                      const std::vector<std::vector<double>>& starts,
                                      const SimplexOptions& opts) {
  SimplexResult best;
  best.fmin = std::numeric_limits<double>::infinity();
  double global_max_abs = 0.0;
  bool first = true;
  for (const auto& s : starts) {
    SimplexResult r = nelder_mead(f, s, opts);
    global_max_abs = std::max(global_max_abs, r.max_abs_x);
    if (first || r.fmin < best.fmin) {
      best = r;
      first = false;
    }
  }
  best.max_abs_x = global_max_abs;
  return best;
}

std::vector<std::vector<double>> fd_hessian(const Objective& f, const std::vector<double>& x,
                                            double rel_step) {
  const size_t n = x.size();
  std::vector<double> h(n);
  for (size_t i = 0; i < n; ++i) h[i] = rel_step * std::max(std::fabs(x[i]), 1e-3);
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  const double f0 = f(x);
  std::vector<double> xp = x;
  for (size_t i = 0; i < n; ++i) {
    xp = x;
    xp[i] = x[i] + h[i];
    const double fp = f(xp);
    xp[i] = x[i] - h[i];
    const double fm = f(xp);
    H[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (size_t j = i + 1; j < n; ++j) {
      xp = x;
      xp[i] = x[i] + h[i]; xp[j] = x[j] + h[j];
      const double fpp = f(xp);
      xp[j] = x[j] - h[j];
      const double fpm = f(xp);
      xp[i] = x[i] - h[i]; xp[j] = x[j] + h[j];
      const double fmp = f(xp);
      xp[j] = x[j] - h[j];
      const double fmm = f(xp);
      H[i][j] = H[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

}  // namespace hgmix
