#pragma once

#include <string>
#include <vector>

#include "hgmix/calibrative.hpp"
#include "hgmix/estimation.hpp"
#include "hgmix/glm.hpp"

namespace hgmix {

struct MixingTarget {
  std::string family;            // "Waring", "GZY" or "HGZY"
  MixingSample::Kind kind = MixingSample::Kind::lambda;
  std::optional<double> r_hat;   // required for kind = p
};

// Theorem-4 mixing density of the Poisson parameter for the three families
// of the empirical pipeline. Waring uses the closed Laplace-type integral
// directly; GZY/HGZY go through the generic Poisson-mixture quadrature over
// their geometric-mixing bases.
double lambda_log_density(const std::string& family, const std::vector<double>& params,
                          double lambda);
double lambda_density(const std::string& family, const std::vector<double>& params,
                      double lambda);

// Theorem-2(2) mixing density of the NB p parameter at fixed r > 1.
double p_log_density_at_r(const std::string& family, const std::vector<double>& params,
                          double r, double p);
double p_density_at_r(const std::string& family, const std::vector<double>& params, double r,
                      double p);

// MLE of the mixing-density parameters on a GLM-derived sample. Each
// likelihood sweep evaluates the log-density on a monotone-cubic interpolation
// grid (log-spaced over the sample range, refined until the interpolated
// loglik is stable to 1e-4).
FitResult fit_mixing(const MixingSample& sample, const MixingTarget& target);

// Interval chi-square against the fitted density: lambda cells (n,n+1],
// p cells (n/(n+r), (n+1)/(n+1+r)], expected masses by quadrature, one
// catch-all for the remainder.
GofReport interval_chisq(const MixingSample& sample, const MixingTarget& target,
                         const FitResult& fit);

}  // namespace hgmix
