#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "hgmix/distributions.hpp"
#include "hgmix/quadrature.hpp"

namespace hgmix {

// A mixing density on (0,1) in the form the calibrative machinery needs:
// log-density parameterized by (ln p, ln(1-p)) so evaluations stay accurate
// arbitrarily close to both endpoints, the derivative ratio f'/f, and the
// endpoint behavior used by the classifier.
struct BaseDensity {
  std::function<double(double lp, double l1p)> log_pdf_l;
  std::function<double(double p)> dlog_pdf;  // f'(p)/f(p)
  bool infinite_at_zero = false;
  double value_at_zero = 0.0;       // limit of f at 0+ when finite
  double tail_exponent_zero = 0.0;  // lim_{p->0+} -p f'/f
  double tail_exponent_one = 0.0;   // beta with f ~ C (1-p)^beta near 1 (+inf: faster than any power)

  double log_pdf(double p) const;
};

BaseDensity make_base_density(const MixingModel& m);

// Theorem-2(2) member of the calibrative family for r > 1, evaluated in the
// substituted form f(p) = (r-1) Int_0^1 t^(r-2) (1-t) w^(1-r) f(w) dt with
// w = p + (1-p) t. Log-space with the integrand peak located first, so it is
// stable for r of the order of hundreds.
double calibrate_up(const BaseDensity& base, double r, double p);
double calibrate_up_log(const BaseDensity& base, double r, double p);

// Theorem-2(3) signed member for 0 < r < 1 (may be a quasi-PDF).
double calibrate_general(const BaseDensity& base, double r, double p);

enum class Verdict { ProperPDF, QuasiPDF, Indeterminate };

struct ClassifyResult {
  Verdict verdict = Verdict::Indeterminate;
  // (p, density value) with value <= -1e-12 when verdict == QuasiPDF
  std::optional<std::pair<double, double>> witness;
};

// Decides whether the r<1 member is a proper PDF or a quasi-PDF from the
// behavior of the base density at 0; boundary cases fall back to a direct
// sign search on calibrate_general.
ClassifyResult classify(const BaseDensity& base, double r);

// Theorem-4 Poisson mixing density
// f(lambda) = Int_0^1 ((1-p)/p) exp(-lambda (1-p)/p) f(p) dp,
// evaluated as a half-line integral in y = (1-p)/p.
double poisson_mix_density(const BaseDensity& base, double lambda);
double poisson_mix_log_density(const BaseDensity& base, double lambda);

struct MixtureReport {
  double max_abs_error = 0.0;
  bool passed = false;
};

// Checks f_X(x) = Int_0^1 NB(x | r, p) g(p) dp for x = 0..x_max against the
// model's pmf; g may be signed.
MixtureReport verify_mixture(const CountModel& model, const std::function<double(double)>& density,
                             double r, int x_max, double tol);

struct TailReport {
  double limit_estimate = 0.0;  // lim ln f(p) / ln(1-p); +inf when not heavy
  bool heavy = false;
  double delta_floor = 0.0;  // smallest certified delta with E[X^delta] = inf
};

// Theorem-1(c) classifier: evaluates ln f / ln(1-p) on p = 1 - 2^-k,
// k = 8..40, with Richardson extrapolation in 1/k.
TailReport tail_index(const BaseDensity& base);

}  // namespace hgmix
