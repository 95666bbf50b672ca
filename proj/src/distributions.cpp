#include "hgmix/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hgmix {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

constexpr double kReduceTol = 1e-12;
constexpr double kSeriesRelTol = 1e-12;

// Absolute tolerance giving ~1e-12 relative accuracy: the first series term
// is a lower bound for the whole (positive, decreasing) series.
double sigma_b_rel(const SigmaBArgs& a) {
  const double first = std::exp(log_beta(a.u, a.w + 1.0));
  return sigma_b(a, std::max(first * kSeriesRelTol, 1e-300));
}

}  // namespace

Poisson::Poisson(double lambda_) : lambda(lambda_) { require(lambda > 0.0, "Poisson: lambda > 0"); }
NegativeBinomial::NegativeBinomial(double r_, double p_) : r(r_), p(p_) {
  require(r > 0.0, "NegativeBinomial: r > 0");
  require(p > 0.0 && p < 1.0, "NegativeBinomial: p in (0,1)");
}
Geometric::Geometric(double p_) : p(p_) { require(p > 0.0 && p < 1.0, "Geometric: p in (0,1)"); }
Zeta::Zeta(double s_) : s(s_) { require(s > 1.0, "Zeta: s > 1"); }
Yule::Yule(double b_) : b(b_) { require(b > 0.0, "Yule: b > 0"); }
Waring::Waring(double a_, double b_) : a(a_), b(b_) {
  require(a > 0.0 && b > 0.0, "Waring: a,b > 0");
}
GeneralizedWaring::GeneralizedWaring(double r_, double a_, double b_) : r(r_), a(a_), b(b_) {
  require(r > 0.0 && a > 0.0 && b > 0.0, "GeneralizedWaring: r,a,b > 0");
}
ZY::ZY(double b_, double c_) : b(b_), c(c_) {
  require(b > 0.0, "ZY: b > 0");
  require(c >= 0.0, "ZY: c >= 0");
  if (c > 0.0 && c < 1e-6)
    throw std::domain_error("ZY: c in (0,1e-6) is numerically degenerate; use c = 0 for the limit");
}
GZY::GZY(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  require(a > 0.0 && b > 0.0 && c > 0.0, "GZY: a,b,c > 0");
}
GW2::GW2(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  require(a > 0.0 && b > 0.0 && c > 0.0, "GW2: a,b,c > 0");
}
HGZY::HGZY(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
  require(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0, "HGZY: a,b,c,d > 0");
}

std::string family_name(const CountModel& m) {
  struct V {
    std::string operator()(const Poisson&) const { return "Poisson"; }
    std::string operator()(const NegativeBinomial&) const { return "NegativeBinomial"; }
    std::string operator()(const Geometric&) const { return "Geometric"; }
    std::string operator()(const Zeta&) const { return "Zeta"; }
    std::string operator()(const Yule&) const { return "Yule"; }
    std::string operator()(const Waring&) const { return "Waring"; }
    std::string operator()(const GeneralizedWaring&) const { return "GeneralizedWaring"; }
    std::string operator()(const ZY&) const { return "ZY"; }
    std::string operator()(const GZY&) const { return "GZY"; }
    std::string operator()(const GW2&) const { return "GW2"; }
    std::string operator()(const HGZY&) const { return "HGZY"; }
  };
  return std::visit(V{}, m);
}

std::vector<double> parameters(const CountModel& m) {
  struct V {
    std::vector<double> operator()(const Poisson& d) const { return {d.lambda}; }
    std::vector<double> operator()(const NegativeBinomial& d) const { return {d.r, d.p}; }
    std::vector<double> operator()(const Geometric& d) const { return {d.p}; }
    std::vector<double> operator()(const Zeta& d) const { return {d.s}; }
    std::vector<double> operator()(const Yule& d) const { return {d.b}; }
    std::vector<double> operator()(const Waring& d) const { return {d.a, d.b}; }
    std::vector<double> operator()(const GeneralizedWaring& d) const { return {d.r, d.a, d.b}; }
    std::vector<double> operator()(const ZY& d) const { return {d.b, d.c}; }
    std::vector<double> operator()(const GZY& d) const { return {d.a, d.b, d.c}; }
    std::vector<double> operator()(const GW2& d) const { return {d.a, d.b, d.c}; }
    std::vector<double> operator()(const HGZY& d) const { return {d.a, d.b, d.c, d.d}; }
  };
  return std::visit(V{}, m);
}

int parameter_count(const CountModel& m) { return static_cast<int>(parameters(m).size()); }

CountModel make_count_model(const std::string& family, const std::vector<double>& v) {
  auto need = [&](size_t k) {
    if (v.size() != k) {
      std::ostringstream os;
      os << family << ": expected " << k << " parameters, got " << v.size();
      throw std::domain_error(os.str());
    }
  };
  if (family == "Poisson") { need(1); return Poisson(v[0]); }
  if (family == "NegativeBinomial") { need(2); return NegativeBinomial(v[0], v[1]); }
  if (family == "Geometric") { need(1); return Geometric(v[0]); }
  if (family == "Zeta") { need(1); return Zeta(v[0]); }
  if (family == "Yule") { need(1); return Yule(v[0]); }
  if (family == "Waring") { need(2); return Waring(v[0], v[1]); }
  if (family == "GeneralizedWaring") { need(3); return GeneralizedWaring(v[0], v[1], v[2]); }
  if (family == "ZY") { need(2); return ZY(v[0], v[1]); }
  if (family == "GZY") { need(3); return GZY(v[0], v[1], v[2]); }
  if (family == "GW2") { need(3); return GW2(v[0], v[1], v[2]); }
  if (family == "HGZY") { need(4); return HGZY(v[0], v[1], v[2], v[3]); }
  throw std::domain_error("unknown count family: " + family);
}

PmfEvaluator::PmfEvaluator(const CountModel& m) : model_(m) {
  struct V {
    double operator()(const Poisson&) const { return 0.0; }
    double operator()(const NegativeBinomial&) const { return 0.0; }
    double operator()(const Geometric&) const { return 0.0; }
    double operator()(const Zeta& d) const { return std::log(riemann_zeta(d.s)); }
    double operator()(const Yule&) const { return 0.0; }
    double operator()(const Waring& d) const { return log_beta(d.a, d.b); }
    double operator()(const GeneralizedWaring& d) const { return log_beta(d.a, d.b); }
    double operator()(const ZY& d) const {
      if (d.c == 0.0) return std::log(riemann_zeta(d.b + 1.0));
      return std::log(sigma_b_rel(SigmaBArgs(1.0 / d.c, 1.0 / d.c, d.b)));
    }
    double operator()(const GZY& d) const {
      return std::log(sigma_b_rel(SigmaBArgs(1.0 / d.c, d.a, d.b)));
    }
    double operator()(const GW2& d) const { return log_beta(d.a, d.b); }
    double operator()(const HGZY& d) const {
      return std::log(sigma_b_rel(SigmaBArgs(d.d / d.c, d.a, d.b)));
    }
  };
  log_norm_ = std::visit(V{}, model_);
  if (!std::isfinite(log_norm_))
    throw accuracy_error("PmfEvaluator: normalizer evaluation failed", log_norm_, 0.0);
}

double PmfEvaluator::log_pmf(long x) const {
  if (x < 0) throw std::domain_error("log_pmf: x must be >= 0");
  const double xd = static_cast<double>(x);
  const double ln = log_norm_;
  struct V {
    double xd;
    long x;
    double ln;
    double operator()(const Poisson& d) const {
      return xd * std::log(d.lambda) - d.lambda - log_gamma(xd + 1.0);
    }
    double operator()(const NegativeBinomial& d) const {
      return log_gamma(xd + d.r) - log_gamma(d.r) - log_gamma(xd + 1.0) +
             d.r * std::log1p(-d.p) + xd * std::log(d.p);
    }
    double operator()(const Geometric& d) const {
      return std::log1p(-d.p) + xd * std::log(d.p);
    }
    double operator()(const Zeta& d) const { return -d.s * std::log(xd + 1.0) - ln; }
    double operator()(const Yule& d) const {
      return std::log(d.b) + log_beta(xd + 1.0, d.b + 1.0);
    }
    double operator()(const Waring& d) const { return log_beta(xd + d.a, d.b + 1.0) - ln; }
    double operator()(const GeneralizedWaring& d) const {
      // Gamma-ratio form; the printed x*B(x,r) denominator has a removable
      // singularity at x = 0.
      return log_gamma(xd + d.r) - log_gamma(d.r) - log_gamma(xd + 1.0) +
             log_beta(xd + d.a, d.b + d.r) - ln;
    }
    double operator()(const ZY& d) const {
      if (d.c == 0.0) return -(d.b + 1.0) * std::log(xd + 1.0) - ln;
      return log_beta((xd + 1.0) / d.c, d.b + 1.0) - ln;
    }
    double operator()(const GZY& d) const {
      // numerator telescopes to a single beta term
      return log_beta(xd / d.c + d.a, d.b + 1.0) - ln;
    }
    double operator()(const GW2& d) const {
      return log_beta_diff(xd / d.c + d.a, (xd + 1.0) / d.c + d.a, d.b) - ln;
    }
    double operator()(const HGZY& d) const {
      const double u1 = xd / d.c + d.a;
      const double u2 = (xd + 1.0) / d.c + d.a;
      const double g = d.d / d.c;
      const double lb1 = log_beta(u1, d.b + 1.0);
      const double lb2 = log_beta(u2, d.b + 1.0);
      const double first = std::exp(lb1) * (-std::expm1(lb2 - lb1));
      const double num = sigma_b_diff(g, u1, u2, d.b, std::max(first * kSeriesRelTol, 1e-300));
      if (!(num > 0.0) || !std::isfinite(num))
        throw accuracy_error("HGZY pmf: numerator evaluation failed", num, 0.0);
      return std::log(num) - ln;
    }
  };
  const double lp = std::visit(V{xd, x, ln}, model_);
  if (lp > 1e-6)
    throw accuracy_error("log_pmf: value exceeds 1, normalizer evaluation failed", lp, 0.0);
  return lp;
}

double log_pmf(const CountModel& m, long x) { return PmfEvaluator(m).log_pmf(x); }

double pmf_ratio(const CountModel& m, long x) {
  if (x < 0) throw std::domain_error("pmf_ratio: x must be >= 0");
  if (const auto* zy = std::get_if<ZY>(&m); zy && zy->c == 0.0) {
    const double xd = static_cast<double>(x);
    return std::pow((xd + 2.0) / (xd + 1.0), zy->b + 1.0);
  }
  PmfEvaluator ev(m);
  return std::exp(ev.log_pmf(x) - ev.log_pmf(x + 1));
}

NormalizationReport normalization_check(const CountModel& m, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("normalization_check: tol must be > 0");
  PmfEvaluator ev(m);
  double sum = 0.0;
  double f_next = std::exp(ev.log_pmf(0));
  const long max_x = 60000000L;
  long check_at = 16;
  // tail exponent is fitted across checkpoint lags: single-step pmf ratios
  // lose their signal to cancellation noise once x is large
  long x_prev = -1;
  double f_prev = 0.0;
  double alpha_prev = 0.0;
  for (long x = 0; x < max_x; ++x) {
    const double f = f_next;
    sum += f;
    f_next = std::exp(ev.log_pmf(x + 1));
    if (x < check_at) continue;
    check_at = x + std::max<long>(16, x / 8);  // geometric check schedule
    if (f_next <= 0.0) return {sum, 0.0};
    // ratios are smoothed across the checkpoint lag so cancellation noise
    // in individual pmf values cannot fake a certification
    if (x_prev >= 0 && f > 0.0 && f_prev > 0.0) {
      const double q_eff = std::exp(std::log(f / f_prev) / (x - x_prev));
      if (q_eff < 0.7) {
        const double tail = f_next / (1.0 - q_eff);
        if (tail < tol) return {sum, tail};
        x_prev = x;
        f_prev = f;
        continue;
      }
    }
    if (x_prev >= 0 && f > 0.0 && f_prev > 0.0) {
      const double alpha = std::log(f_prev / f) /
                           std::log((x + 1.0) / (x_prev + 1.0));
      const bool stable = alpha_prev != 0.0 && std::fabs(alpha - alpha_prev) < 0.05;
      alpha_prev = alpha;
      if (stable && alpha > 1.0) {
        const double tail = f_next * (x + 2.0) / (alpha - 1.0) * (1.0 + 4.0 / (x + 2.0));
        if (tail < tol) return {sum, tail};
      }
    }
    x_prev = x;
    f_prev = f;
  }
  throw accuracy_error("normalization_check: tail bound not certified", sum,
                       std::numeric_limits<double>::infinity());
}

std::optional<CountModel> reduce(const CountModel& m) {
  auto near = [](double v, double t) { return std::fabs(v - t) <= kReduceTol; };
  CountModel cur = m;
  bool changed = false;
  for (;;) {
    if (const auto* d = std::get_if<HGZY>(&cur)) {
      if (near(d->d, 1.0)) { cur = GZY(d->a, d->b, d->c); changed = true; continue; }
    } else if (const auto* d = std::get_if<GZY>(&cur)) {
      if (near(d->a * d->c, 1.0)) { cur = ZY(d->b, d->c); changed = true; continue; }
    } else if (const auto* d = std::get_if<ZY>(&cur)) {
      if (near(d->c, 1.0)) { cur = Yule(d->b); changed = true; continue; }
      if (d->c == 0.0) { cur = Zeta(d->b + 1.0); changed = true; continue; }
    } else if (const auto* d = std::get_if<GW2>(&cur)) {
      if (near(d->c, 1.0)) { cur = Waring(d->a, d->b); changed = true; continue; }
    } else if (const auto* d = std::get_if<Waring>(&cur)) {
      if (near(d->a, 1.0)) { cur = Yule(d->b); changed = true; continue; }
    } else if (const auto* d = std::get_if<GeneralizedWaring>(&cur)) {
      if (near(d->r, 1.0)) { cur = Waring(d->a, d->b); changed = true; continue; }
    }
    break;
  }
  if (!changed) return std::nullopt;
  return cur;
}

// ---------------------------------------------------------------------------
// Mixing families
// ---------------------------------------------------------------------------

BetaMix::BetaMix(double a_, double b_) : a(a_), b(b_) {
  require(a > 0.0 && b > 0.0, "BetaMix: a,b > 0");
}
GB1::GB1(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  require(a > 0.0 && b > 0.0 && c > 0.0, "GB1: a,b,c > 0");
}
Kumaraswamy::Kumaraswamy(double b_, double c_) : b(b_), c(c_) {
  require(b > 0.0 && c > 0.0, "Kumaraswamy: b,c > 0");
}
SigmaBMix::SigmaBMix(double b_, double c_) : b(b_), c(c_) {
  require(b > 0.0 && c > 0.0, "SigmaBMix: b,c > 0");
}
SigmaBLimitMix::SigmaBLimitMix(double b_) : b(b_) { require(b > 0.0, "SigmaBLimitMix: b > 0"); }
GSigmaB::GSigmaB(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  require(a > 0.0 && b > 0.0 && c > 0.0, "GSigmaB: a,b,c > 0");
}
HGSigmaB::HGSigmaB(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
  require(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0, "HGSigmaB: a,b,c,d > 0");
}
LogitNormal::LogitNormal(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
  require(sigma > 0.0, "LogitNormal: sigma > 0");
}

std::string mixing_name(const MixingModel& m) {
  struct V {
    std::string operator()(const BetaMix&) const { return "Beta"; }
    std::string operator()(const GB1&) const { return "GB1"; }
    std::string operator()(const Kumaraswamy&) const { return "Kumaraswamy"; }
    std::string operator()(const SigmaBMix&) const { return "SigmaB"; }
    std::string operator()(const SigmaBLimitMix&) const { return "SigmaBLimit"; }
    std::string operator()(const GSigmaB&) const { return "GSigmaB"; }
    std::string operator()(const HGSigmaB&) const { return "HGSigmaB"; }
    std::string operator()(const LogitNormal&) const { return "LogitNormal"; }
  };
  return std::visit(V{}, m);
}

namespace {

// ln(1 - p^c) evaluated stably for p near 0 or 1.
double log1m_pow(double p, double c) { return std::log(-std::expm1(c * std::log(p))); }

}  // namespace

double mixing_log_pdf(const MixingModel& m, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("mixing_log_pdf: p must be in (0,1)");
  struct V {
    double p;
    double operator()(const BetaMix& d) const {
      return (d.a - 1.0) * std::log(p) + (d.b - 1.0) * std::log1p(-p) - log_beta(d.a, d.b);
    }
    double operator()(const GB1& d) const {
      return std::log(d.c) + (d.c * d.a - 1.0) * std::log(p) +
             (d.b - 1.0) * log1m_pow(p, d.c) - log_beta(d.a, d.b);
    }
    double operator()(const Kumaraswamy& d) const {
      return std::log(d.c * d.b) + (d.c - 1.0) * std::log(p) + (d.b - 1.0) * log1m_pow(p, d.c);
    }
    double operator()(const SigmaBMix& d) const {
      const double s = sigma_b_rel(SigmaBArgs(1.0 / d.c, 1.0 / d.c, d.b));
      return std::log(d.c) + d.b * log1m_pow(p, d.c) - std::log1p(-p) - std::log(s);
    }
    double operator()(const SigmaBLimitMix& d) const {
      return d.b * std::log(-std::log(p)) - std::log(riemann_zeta(d.b + 1.0)) -
             log_gamma(d.b + 1.0) - std::log1p(-p);
    }
    double operator()(const GSigmaB& d) const {
      const double s = sigma_b_rel(SigmaBArgs(1.0 / d.c, d.a, d.b));
      return std::log(d.c) + (d.c * d.a - 1.0) * std::log(p) + d.b * log1m_pow(p, d.c) -
             std::log1p(-p) - std::log(s);
    }
    double operator()(const HGSigmaB& d) const {
      const double s = sigma_b_rel(SigmaBArgs(d.d / d.c, d.a, d.b));
      return std::log(d.c) + (d.c * d.a - 1.0) * std::log(p) + d.b * log1m_pow(p, d.c) -
             log1m_pow(p, d.d) - std::log(s);
    }
    double operator()(const LogitNormal& d) const {
      const double z = (std::log(p) - std::log1p(-p) - d.mu) / d.sigma;
      return -0.5 * z * z - std::log(d.sigma) - 0.5 * std::log(2.0 * M_PI) - std::log(p) -
             std::log1p(-p);
    }
  };
  return std::visit(V{p}, m);
}

double mixing_dlog_pdf(const MixingModel& m, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("mixing_dlog_pdf: p must be in (0,1)");
  struct V {
    double p;
    double operator()(const BetaMix& d) const {
      return (d.a - 1.0) / p - (d.b - 1.0) / (1.0 - p);
    }
    double operator()(const GB1& d) const {
      const double pc = std::exp(d.c * std::log(p));
      return (d.c * d.a - 1.0) / p - (d.b - 1.0) * d.c * pc / (p * (1.0 - pc));
    }
    double operator()(const Kumaraswamy& d) const {
      const double pc = std::exp(d.c * std::log(p));
      return (d.c - 1.0) / p - (d.b - 1.0) * d.c * pc / (p * (1.0 - pc));
    }
    double operator()(const SigmaBMix& d) const {
      const double pc = std::exp(d.c * std::log(p));
      return -d.b * d.c * pc / (p * (1.0 - pc)) + 1.0 / (1.0 - p);
    }
    double operator()(const SigmaBLimitMix& d) const {
      return d.b / (p * std::log(p)) + 1.0 / (1.0 - p);
    }
    double operator()(const GSigmaB& d) const {
      const double pc = std::exp(d.c * std::log(p));
      return (d.c * d.a - 1.0) / p - d.b * d.c * pc / (p * (1.0 - pc)) + 1.0 / (1.0 - p);
    }
    double operator()(const HGSigmaB& d) const {
      const double pc = std::exp(d.c * std::log(p));
      const double pd = std::exp(d.d * std::log(p));
      return (d.c * d.a - 1.0) / p - d.b * d.c * pc / (p * (1.0 - pc)) +
             d.d * pd / (p * (1.0 - pd));
    }
    double operator()(const LogitNormal& d) const {
      const double logit = std::log(p) - std::log1p(-p);
      return -1.0 / p + 1.0 / (1.0 - p) - (logit - d.mu) / (d.sigma * d.sigma * p * (1.0 - p));
    }
  };
  return std::visit(V{p}, m);
}

std::optional<CountModel> geometric_mixture_of(const MixingModel& m) {
  struct V {
    std::optional<CountModel> operator()(const BetaMix& d) const { return Waring(d.a, d.b); }
    std::optional<CountModel> operator()(const GB1& d) const { return GW2(d.a, d.b, d.c); }
    std::optional<CountModel> operator()(const Kumaraswamy& d) const {
      return GW2(1.0, d.b, d.c);
    }
    std::optional<CountModel> operator()(const SigmaBMix& d) const { return ZY(d.b, d.c); }
    std::optional<CountModel> operator()(const SigmaBLimitMix& d) const { return ZY(d.b, 0.0); }
    std::optional<CountModel> operator()(const GSigmaB& d) const { return GZY(d.a, d.b, d.c); }
    std::optional<CountModel> operator()(const HGSigmaB& d) const {
      return HGZY(d.a, d.b, d.c, d.d);
    }
    std::optional<CountModel> operator()(const LogitNormal&) const { return std::nullopt; }
  };
  return std::visit(V{}, m);
}

}  // namespace hgmix
