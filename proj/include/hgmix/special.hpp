#pragma once

#include <stdexcept>
#include <string>

namespace hgmix {

// Thrown when a quadrature or series evaluation cannot reach the requested
// tolerance; carries the best estimate so callers can decide what to do.
class accuracy_error : public std::runtime_error {
 public:
  accuracy_error(const std::string& what, double best, double bound)
      : std::runtime_error(what), best_estimate(best), error_bound(bound) {}
  double best_estimate;
  double error_bound;
};

// ln Gamma(z) for z > 0. Relative error <= 1e-13 (delegates to lgamma_r).
double log_gamma(double z);

// ln B(u, w) = lgamma(u) + lgamma(w) - lgamma(u + w), u, w > 0.
double log_beta(double u, double w);

// Riemann zeta(s) = sum_{x>=0} (x+1)^(-s) for s > 1.
// Euler-Maclaurin: 1e4 explicit terms + 4 correction terms.
double riemann_zeta(double s);

// Arguments of the series Sigma_B(gamma, u, w) = sum_{k>=0} B(gamma*k + u, w + 1).
struct SigmaBArgs {
  double gamma;  // series step, > 0
  double u;      // series start, > 0
  double w;      // beta second argument minus one, > 0 (w <= 0 diverges)
  SigmaBArgs(double gamma_, double u_, double w_);
};

// Sigma_B series with a certified truncation bound: stops once
// Gamma(w+1) * (gamma*(N-1)+u)^(-w) / (gamma*w) < tol, which dominates the
// true remainder because B(x, w+1) <= Gamma(w+1) * x^(-(w+1)).
double sigma_b(const SigmaBArgs& args, double tol);

// sum_{k>=0} [B(gamma*k + u1, w+1) - B(gamma*k + u2, w+1)] for u2 > u1,
// each term formed with expm1 so near-cancelling pairs stay accurate.
// Absolute truncation bound < tol.
double sigma_b_diff(double gamma, double u1, double u2, double w, double tol);

// ln[B(u1, w) - B(u2, w)] for u2 > u1, switching to the beta-integral
// representation when the direct lgamma difference would cancel.
double log_beta_diff(double u1, double u2, double w);

// Upper regularized incomplete gamma Q(s, x), s > 0, x >= 0.
// chi^2_k upper tail = Q(k/2, x/2).
double reg_inc_gamma_upper(double s, double x);

inline double chisq_upper_tail(double statistic, double df) {
  return reg_inc_gamma_upper(0.5 * df, 0.5 * statistic);
}

}  // namespace hgmix
