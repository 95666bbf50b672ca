#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hgmix/special.hpp"

namespace hgmix {

// ---------------------------------------------------------------------------
// Count families. Sample space is x in {0,1,2,...} for every variant.
// ---------------------------------------------------------------------------

struct Poisson {
  double lambda;
  explicit Poisson(double lambda_);
};
struct NegativeBinomial {
  // p is the probability of a failure before the r-th success; mean r*p/(1-p).
  double r, p;
  NegativeBinomial(double r_, double p_);
};
struct Geometric {
  double p;
  explicit Geometric(double p_);
};
struct Zeta {
  double s;  // > 1
  explicit Zeta(double s_);
};
struct Yule {
  double b;
  explicit Yule(double b_);
};
struct Waring {
  double a, b;
  Waring(double a_, double b_);
};
struct GeneralizedWaring {
  double r, a, b;
  GeneralizedWaring(double r_, double a_, double b_);
};
struct ZY {
  // c == 0 selects the c->0+ limit (equals Zeta(b+1)); c in (0,1e-6) is
  // rejected, callers wanting the limit must pass c = 0 exactly.
  double b, c;
  ZY(double b_, double c_);
};
struct GZY {
  double a, b, c;
  GZY(double a_, double b_, double c_);
};
struct GW2 {
  double a, b, c;
  GW2(double a_, double b_, double c_);
};
struct HGZY {
  double a, b, c, d;
  HGZY(double a_, double b_, double c_, double d_);
};

using CountModel = std::variant<Poisson, NegativeBinomial, Geometric, Zeta, Yule, Waring,
                                GeneralizedWaring, ZY, GZY, GW2, HGZY>;

std::string family_name(const CountModel& m);
std::vector<double> parameters(const CountModel& m);
int parameter_count(const CountModel& m);
// Builds a model from a family name ("HGZY", "Waring", ...) and parameters.
CountModel make_count_model(const std::string& family, const std::vector<double>& params);

// ln f(x). Series-backed normalizers (ZY/GZY/HGZY) are evaluated to 1e-12
// relative tolerance.
double log_pmf(const CountModel& m, long x);

// f(x)/f(x+1). ZY(c=0) uses the closed ratio ((x+2)/(x+1))^(b+1); everything
// else goes through log_pmf differences.
double pmf_ratio(const CountModel& m, long x);

// Caches the model's normalizing constant so repeated pmf evaluations under
// one parameter vector don't re-sum the series. Used by the fitters.
class PmfEvaluator {
 public:
  explicit PmfEvaluator(const CountModel& m);
  double log_pmf(long x) const;
  const CountModel& model() const { return model_; }

 private:
  CountModel model_;
  double log_norm_ = 0.0;  // meaning depends on family
};

struct NormalizationReport {
  double sum;
  double tail_bound;
};

// Sums the PMF until a tail bound fitted from the PMF ratio certifies the
// remainder below tol.
NormalizationReport normalization_check(const CountModel& m, double tol);

// Most specialized equivalent family per the parametric hierarchy
// (HGZY d=1 -> GZY; GZY a=1/c -> ZY; ZY c=1 -> Yule; ZY c=0 -> Zeta(b+1);
// GW2 c=1 -> Waring; Waring a=1 -> Yule; GeneralizedWaring r=1 -> Waring),
// chained until no edge applies. none when the model is already terminal.
std::optional<CountModel> reduce(const CountModel& m);

// ---------------------------------------------------------------------------
// Mixing families on (0,1).
// ---------------------------------------------------------------------------

struct BetaMix {
  double a, b;
  BetaMix(double a_, double b_);
};
struct GB1 {
  double a, b, c;
  GB1(double a_, double b_, double c_);
};
struct Kumaraswamy {
  double b, c;
  Kumaraswamy(double b_, double c_);
};
struct SigmaBMix {
  double b, c;
  SigmaBMix(double b_, double c_);
};
struct SigmaBLimitMix {
  double b;
  explicit SigmaBLimitMix(double b_);
};
struct GSigmaB {
  double a, b, c;
  GSigmaB(double a_, double b_, double c_);
};
struct HGSigmaB {
  double a, b, c, d;
  HGSigmaB(double a_, double b_, double c_, double d_);
};
struct LogitNormal {
  double mu, sigma;
  LogitNormal(double mu_, double sigma_);
};

using MixingModel = std::variant<BetaMix, GB1, Kumaraswamy, SigmaBMix, SigmaBLimitMix,
                                 GSigmaB, HGSigmaB, LogitNormal>;

std::string mixing_name(const MixingModel& m);

// ln of the density at p, 0 < p < 1.
double mixing_log_pdf(const MixingModel& m, double p);
// f'(p)/f(p), closed form per family.
double mixing_dlog_pdf(const MixingModel& m, double p);

// The count model obtained by mixing NegativeBinomial(r=1,p) over the given
// density, for the families where that mixture has a closed form.
std::optional<CountModel> geometric_mixture_of(const MixingModel& m);

}  // namespace hgmix
