#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hgmix/distributions.hpp"
#include "hgmix/optimize.hpp"

namespace hgmix {

struct CountSample {
  std::vector<long> counts;
  size_t n() const { return counts.size(); }
};

struct SummaryStats {
  size_t n = 0;
  double min = 0.0, max = 0.0, mean = 0.0, sd = 0.0;
  double skewness = 0.0, kurtosis = 0.0;
  bool higher_moments_defined = true;
};

// Sample-adjusted moments: sd with the n-1 divisor, skewness
// G1 = g1 sqrt(n(n-1))/(n-2) and non-excess kurtosis G2 + 3 (the convention
// that reproduces the reference tables on the Swedish data).
SummaryStats summary_stats(const std::vector<double>& values);

struct FitOptions {
  std::vector<std::vector<double>> starts;  // natural-parameter starts; empty = default grid
  int max_iter = 4000;
  double tol = 1e-10;
  bool compute_std_errors = true;
};

struct FitResult {
  std::string family;
  std::vector<double> estimates;
  std::vector<double> std_errors;  // empty unless converged with a PD Hessian
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  bool boundary_flag = false;
  std::string message;
};

// Maximum likelihood over log-transformed parameters, Nelder-Mead with a
// deterministic 5-point multi-start grid. Divergence to the log-parameter
// boundary is reported as a non-converged result, not an exception.
FitResult mle_fit(const std::string& family, const CountSample& sample,
                  const FitOptions& options = {});

// Square roots of the inverse observed-information diagonal
// (finite-difference Hessian in natural parameters).
std::vector<double> std_errors(const FitResult& fit, const CountSample& sample);

struct GofCell {
  long x_lo = 0;        // cell covers {x_lo} or, for the catch-all, [x_lo, inf)
  bool catch_all = false;
  double observed = 0.0;
  double expected = 0.0;
};

struct GofReport {
  double statistic = 0.0;
  std::vector<GofCell> cells;
  int df = 0;
  double p_value = 0.0;
};

enum class GofMode { at_mle, minimized };

// Pearson chi-square with cells {x : n f(x) >= 10} plus one catch-all;
// df = #cells - #params - 1. `minimized` re-optimizes the parameters against
// the statistic (cell layout frozen at the MLE layout).
GofReport chisq_gof(const CountModel& fitted, const CountSample& sample,
                    GofMode mode = GofMode::at_mle);

struct FamilyAssessment {
  FitResult fit;
  std::optional<GofReport> gof;         // absent when the fit failed
  bool rejected_at_05 = false;
  std::optional<double> aic;            // suppressed for rejected families
  std::optional<double> bic;
};

// Fits HGZY, GZY, GW2, ZY, Waring, Zeta, Yule; ranks the non-rejected
// families by AIC/BIC.
std::vector<FamilyAssessment> fit_all_hg(const CountSample& sample);

// Names in the Table-3 fitting order.
const std::vector<std::string>& hg_family_names();

// Inverse-CDF sampler driven by the PMF partial sums, for the
// self-consistency checks.
std::vector<long> sample_counts(const CountModel& m, size_t n, unsigned long seed);

}  // namespace hgmix
