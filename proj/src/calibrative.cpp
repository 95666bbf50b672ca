#include "hgmix/calibrative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hgmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden-section maximum refinement of g on [a,b].
template <class F>
double golden_max(const F& g, double a, double b, int iters = 60) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int i = 0; i < iters && (b - a) > 1e-14 * (1.0 + std::fabs(a)); ++i) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = g(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = g(x1);
    }
  }
  return 0.5 * (a + b);
}

// Composite scan grid on (0,1): geometric tails + uniform interior.
std::vector<double> scan_grid() {
  std::vector<double> t;
  for (int j = 50; j >= 1; --j) t.push_back(std::ldexp(1.0, -j));
  for (int i = 1; i < 128; ++i) t.push_back(i / 128.0);
  for (int j = 1; j <= 50; ++j) t.push_back(1.0 - std::ldexp(1.0, -j));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

struct PeakInfo {
  double tmax;
  double gmax;
};

template <class G>
PeakInfo locate_peak(const G& g) {
  static const std::vector<double> grid = scan_grid();
  double best = -kInf;
  size_t bi = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double v = g(grid[i]);
    if (std::isfinite(v) && v > best) { best = v; bi = i; }
  }
  if (!std::isfinite(best)) throw accuracy_error("locate_peak: integrand vanished everywhere", 0.0, 0.0);
  const double lo = bi > 0 ? grid[bi - 1] : grid[bi] * 0.25;
  const double hi = bi + 1 < grid.size() ? grid[bi + 1] : 0.5 * (1.0 + grid[bi]);
  const double tm = golden_max(g, lo, hi);
  const double gm = g(tm);
  if (std::isfinite(gm) && gm >= best) return {tm, gm};
  return {grid[bi], best};
}

}  // namespace

double BaseDensity::log_pdf(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("BaseDensity::log_pdf: p must be in (0,1)");
  return log_pdf_l(std::log(p), std::log1p(-p));
}

BaseDensity make_base_density(const MixingModel& m) {
  BaseDensity out;
  out.dlog_pdf = [m](double p) { return mixing_dlog_pdf(m, p); };

  struct V {
    BaseDensity& o;
    void operator()(const BetaMix& d) const {
      const double lB = log_beta(d.a, d.b);
      o.log_pdf_l = [=](double lp, double l1p) {
        return (d.a - 1.0) * lp + (d.b - 1.0) * l1p - lB;
      };
      o.infinite_at_zero = d.a < 1.0;
      o.value_at_zero = d.a > 1.0 ? 0.0 : (d.a == 1.0 ? std::exp(-lB) : kInf);
      o.tail_exponent_zero = 1.0 - d.a;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const GB1& d) const {
      const double lB = log_beta(d.a, d.b);
      o.log_pdf_l = [=](double lp, double) {
        return std::log(d.c) + (d.c * d.a - 1.0) * lp +
               (d.b - 1.0) * std::log(-std::expm1(d.c * lp)) - lB;
      };
      o.infinite_at_zero = d.c * d.a < 1.0;
      o.value_at_zero = d.c * d.a > 1.0 ? 0.0 : (d.c * d.a == 1.0 ? d.c * std::exp(-lB) : kInf);
      o.tail_exponent_zero = 1.0 - d.c * d.a;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const Kumaraswamy& d) const {
      o.log_pdf_l = [=](double lp, double) {
        return std::log(d.c * d.b) + (d.c - 1.0) * lp +
               (d.b - 1.0) * std::log(-std::expm1(d.c * lp));
      };
      o.infinite_at_zero = d.c < 1.0;
      o.value_at_zero = d.c > 1.0 ? 0.0 : (d.c == 1.0 ? d.b : kInf);
      o.tail_exponent_zero = 1.0 - d.c;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const SigmaBMix& d) const {
      const double lS = std::log(sigma_b(SigmaBArgs(1.0 / d.c, 1.0 / d.c, d.b),
                                         std::exp(log_beta(1.0 / d.c, d.b + 1.0)) * 1e-13));
      o.log_pdf_l = [=](double lp, double l1p) {
        return std::log(d.c) + d.b * std::log(-std::expm1(d.c * lp)) - l1p - lS;
      };
      o.infinite_at_zero = false;
      o.value_at_zero = d.c * std::exp(-lS);
      o.tail_exponent_zero = 0.0;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const SigmaBLimitMix& d) const {
      const double lz = std::log(riemann_zeta(d.b + 1.0)) + log_gamma(d.b + 1.0);
      o.log_pdf_l = [=](double lp, double l1p) {
        return d.b * std::log(-lp) - lz - l1p;
      };
      o.infinite_at_zero = true;
      o.value_at_zero = kInf;
      o.tail_exponent_zero = 0.0;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const GSigmaB& d) const {
      const double lS = std::log(sigma_b(SigmaBArgs(1.0 / d.c, d.a, d.b),
                                         std::exp(log_beta(d.a, d.b + 1.0)) * 1e-13));
      o.log_pdf_l = [=](double lp, double l1p) {
        return std::log(d.c) + (d.c * d.a - 1.0) * lp +
               d.b * std::log(-std::expm1(d.c * lp)) - l1p - lS;
      };
      o.infinite_at_zero = d.c * d.a < 1.0;
      o.value_at_zero = d.c * d.a > 1.0 ? 0.0 : (d.c * d.a == 1.0 ? d.c * std::exp(-lS) : kInf);
      o.tail_exponent_zero = 1.0 - d.c * d.a;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const HGSigmaB& d) const {
      const double lS = std::log(sigma_b(SigmaBArgs(d.d / d.c, d.a, d.b),
                                         std::exp(log_beta(d.a, d.b + 1.0)) * 1e-13));
      o.log_pdf_l = [=](double lp, double) {
        return std::log(d.c) + (d.c * d.a - 1.0) * lp +
               d.b * std::log(-std::expm1(d.c * lp)) -
               std::log(-std::expm1(d.d * lp)) - lS;
      };
      o.infinite_at_zero = d.c * d.a < 1.0;
      o.value_at_zero = d.c * d.a > 1.0 ? 0.0
                        : (d.c * d.a == 1.0 ? d.c / d.d * std::exp(-lS) : kInf);
      o.tail_exponent_zero = 1.0 - d.c * d.a;
      o.tail_exponent_one = d.b - 1.0;
    }
    void operator()(const LogitNormal& d) const {
      const double lc = -std::log(d.sigma) - 0.5 * std::log(2.0 * M_PI);
      o.log_pdf_l = [=](double lp, double l1p) {
        const double z = (lp - l1p - d.mu) / d.sigma;
        return lc - 0.5 * z * z - lp - l1p;
      };
      o.infinite_at_zero = false;
      o.value_at_zero = 0.0;
      o.tail_exponent_zero = -kInf;
      o.tail_exponent_one = kInf;
    }
  };
  std::visit(V{out}, m);
  return out;
}

namespace {

// log of the Theorem-2(2) integrand at t, without the (r-1) factor:
// (r-2) ln t + ln(1-t) + (1-r) ln w + ln f(w), w = p + (1-p) t.
struct UpIntegrand {
  const BaseDensity* base;
  double r, p, l1p_p;  // l1p_p = log1p(-p)
  double operator()(double t) const {
    if (t <= 0.0 || t >= 1.0) return -kInf;
    const double omega = p + (1.0 - p) * t;
    const double l1t = std::log1p(-t);
    const double lom = std::log(omega);
    // ln(1 - omega) = ln(1-p) + ln(1-t), exact for omega close to 1
    const double l1om = l1p_p + l1t;
    return (r - 2.0) * std::log(t) + l1t + (1.0 - r) * lom + base->log_pdf_l(lom, l1om);
  }
};

}  // namespace

double calibrate_up_log(const BaseDensity& base, double r, double p) {
  if (!(r > 1.0)) throw std::domain_error("calibrate_up: r must be > 1");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("calibrate_up: p must be in (0,1)");
  const double l1p_p = std::log1p(-p);
  // g(t) = (r-2) ln t + h(t) with the regular part
  // h(t) = ln(1-t) + (1-r) ln w + ln f(w), w = p + (1-p) t; h(0) is finite.
  auto h = [&](double t) -> double {
    if (t >= 1.0) return -kInf;
    const double omega = p + (1.0 - p) * t;
    const double lom = std::log(omega);
    const double l1om = l1p_p + std::log1p(-t);
    return std::log1p(-t) + (1.0 - r) * lom + base.log_pdf_l(lom, l1om);
  };
  UpIntegrand g{&base, r, p, l1p_p};
  const PeakInfo pk = locate_peak(g);
  const double tm = pk.tmax;

  QuadratureSpec spec(1e-14, 1e-10, 4000);
  // right piece (tm, 1), scaled by the located peak value
  const double right_log = pk.gmax + std::log(integrate([&](double t) {
    const double v = g(t) - pk.gmax;
    return v < -745.0 ? 0.0 : std::exp(v);
  }, tm, 1.0, spec));

  double left_log;
  if (r < 2.0) {
    // Int_0^tm t^(r-2) e^h dt with t = tm s^q, q = 1/(r-1): the singular
    // powers of s cancel exactly, leaving q tm^(r-1) Int_0^1 e^(h(tm s^q)) ds.
    // For r near 1 the mass lives at astronomically small t, which this
    // parameterization reaches without under/overflow.
    const double q = 1.0 / (r - 1.0);
    auto t_of_s = [&](double s) {
      const double lt = q * std::log(s);
      return lt < -745.0 ? 0.0 : tm * std::exp(lt);
    };
    double hmax = -kInf;
    for (int i = 0; i <= 32; ++i) {
      const double v = h(t_of_s(i / 32.0 + 1e-12));
      if (std::isfinite(v) && v > hmax) hmax = v;
    }
    if (!std::isfinite(hmax)) {
      left_log = -kInf;
    } else {
      const double integral = integrate([&](double s) {
        if (s <= 0.0) return 0.0;
        const double v = h(t_of_s(s)) - hmax;
        return v < -745.0 ? 0.0 : std::exp(v);
      }, 0.0, 1.0, spec);
      left_log = std::log(q) + (r - 1.0) * std::log(tm) + hmax + std::log(integral);
    }
  } else {
    const double integral = integrate([&](double t) {
      const double v = g(t) - pk.gmax;
      return v < -745.0 ? 0.0 : std::exp(v);
    }, 0.0, tm, spec);
    left_log = pk.gmax + std::log(integral);
  }

  const double m = std::max(left_log, right_log);
  if (!std::isfinite(m)) return -kInf;
  return std::log(r - 1.0) + m +
         std::log(std::exp(left_log - m) + std::exp(right_log - m));
}

double calibrate_up(const BaseDensity& base, double r, double p) {
  return std::exp(calibrate_up_log(base, r, p));
}

double calibrate_general(const BaseDensity& base, double r, double p) {
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("calibrate_general: r must be in (0,1)");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("calibrate_general: p must be in (0,1)");
  const double l1p_p = std::log1p(-p);
  // (t/w)^(r-1) [1 - (1-w)(f'/f(w) - (r-1)/w)] f(w), w = p + (1-p) t
  auto F = [&](double t) -> double {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double omega = p + (1.0 - p) * t;
    const double lom = std::log(omega);
    const double l1om = l1p_p + std::log1p(-t);
    const double one_m_om = 1.0 - omega;
    const double bracket = 1.0 - one_m_om * (base.dlog_pdf(omega) - (r - 1.0) / omega);
    const double env = (r - 1.0) * (std::log(t) - lom) + base.log_pdf_l(lom, l1om);
    return std::exp(env) * bracket;
  };
  const double beta1 = base.tail_exponent_one;
  QuadratureSpec plain(1e-13, 1e-9, 4000);
  // left half: t^(r-1) singularity at t = 0
  QuadratureSpec ls(1e-13, 1e-9, 4000, EndpointSingularity::left_power, r - 1.0);
  const double left = integrate_unit([&](double s) { return F(0.5 * s) * 0.5; }, ls);
  double right;
  if (std::isfinite(beta1) && beta1 < 0.0) {
    // f(w) ~ (1-w)^beta1 makes t -> 1 an integrable power endpoint
    QuadratureSpec rs(1e-13, 1e-9, 4000, EndpointSingularity::left_power, beta1);
    right = integrate_unit([&](double s) { return F(1.0 - 0.5 * s) * 0.5; }, rs);
  } else {
    right = integrate([&](double t) { return F(t); }, 0.5, 1.0, plain);
  }
  return left + right;
}

ClassifyResult classify(const BaseDensity& base, double r) {
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("classify: r must be in (0,1)");
  const double thresh = 1.0 - r;
  const double tol = 1e-9;

  auto witness_search = [&]() -> std::optional<std::pair<double, double>> {
    for (double lp = -1.0; lp >= -27.0; lp -= 0.5) {
      const double p = std::exp(lp);
      const double v = calibrate_general(base, r, p);
      if (v <= -1e-12) return std::make_pair(p, v);
    }
    return std::nullopt;
  };

  ClassifyResult res;
  if (base.infinite_at_zero && base.tail_exponent_zero > thresh + tol) {
    // (2)(a): global inequality -p f'/f > 1 - r - p/(1-p) on a 1000-point grid
    bool global_ok = true;
    for (int i = 1; i <= 1000 && global_ok; ++i) {
      const double p = i / 1001.0;
      if (!(-p * base.dlog_pdf(p) > thresh - p / (1.0 - p))) global_ok = false;
    }
    if (global_ok) {
      res.verdict = Verdict::ProperPDF;
      return res;
    }
  }
  // (1)(a) sufficient conditions predict a quasi-PDF; boundary and
  // inconclusive cases go through the same direct sign search, and the
  // QuasiPDF verdict is only issued with a concrete witness in hand.
  if (auto w = witness_search()) {
    res.verdict = Verdict::QuasiPDF;
    res.witness = w;
  } else {
    res.verdict = Verdict::Indeterminate;
  }
  return res;
}

double poisson_mix_log_density(const BaseDensity& base, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("poisson_mix_density: lambda must be > 0");
  // y = (1-p)/p; integrand y exp(-lambda y) f(1/(1+y)); in s = ln y:
  // E(s) = 2s - lambda e^s + ln f - 2 ln(1+e^s)
  auto E = [&](double s) -> double {
    const double y = std::exp(s);
    const double l1py = (s > 30.0) ? s : std::log1p(y);
    const double lp = -l1py;
    const double l1p = s - l1py;
    return 2.0 * s - lambda * y + base.log_pdf_l(lp, l1p) - 2.0 * l1py;
  };
  // the peak sits within a few units of s = -ln(lambda)
  const double s0 = std::clamp(-std::log(lambda), -45.0, 45.0);
  double smax = s0, emax = -kInf;
  for (double s = s0 - 26.0; s <= s0 + 26.0; s += 0.5) {
    const double v = E(s);
    if (std::isfinite(v) && v > emax) { emax = v; smax = s; }
  }
  if (!std::isfinite(emax))
    throw accuracy_error("poisson_mix_density: integrand vanished", 0.0, 0.0);
  const double sm = golden_max(E, smax - 0.6, smax + 0.6);
  if (E(sm) > emax) { emax = E(sm); smax = sm; }
  double lo = smax, hi = smax;
  while (lo > -746.0 && E(lo) > emax - 46.0) lo -= 1.0;
  while (hi < 746.0 && E(hi) > emax - 46.0) hi += 1.0;
  QuadratureSpec spec(1e-13, 1e-9, 4000);
  const double I = integrate([&](double s) {
    const double v = E(s) - emax;
    return v < -745.0 ? 0.0 : std::exp(v);
  }, lo, hi, spec);
  return emax + std::log(I);
}

double poisson_mix_density(const BaseDensity& base, double lambda) {
  return std::exp(poisson_mix_log_density(base, lambda));
}

MixtureReport verify_mixture(const CountModel& model, const std::function<double(double)>& density,
                             double r, int x_max, double tol) {
  PmfEvaluator ev(model);
  const double lgr = log_gamma(r);
  MixtureReport rep;
  QuadratureSpec spec(1e-13, 1e-9, 4000);
  for (int x = 0; x <= x_max; ++x) {
    const double lgx = log_gamma(x + r) - lgr - log_gamma(x + 1.0);
    auto f = [&](double p) -> double {
      if (p <= 0.0 || p >= 1.0) return 0.0;
      const double lnb = lgx + r * std::log1p(-p) + x * std::log(p);
      return std::exp(lnb) * density(p);
    };
    const double mixed = integrate_unit(f, spec);
    const double err = std::fabs(mixed - std::exp(ev.log_pmf(x)));
    rep.max_abs_error = std::max(rep.max_abs_error, err);
  }
  rep.passed = rep.max_abs_error < tol;
  return rep;
}

TailReport tail_index(const BaseDensity& base) {
  const double ln2 = std::log(2.0);
  std::vector<double> L;
  for (int k = 8; k <= 40; ++k) {
    const double l1p = -k * ln2;
    const double lp = std::log1p(-std::ldexp(1.0, -k));
    L.push_back(base.log_pdf_l(lp, l1p) / l1p);
  }
  // L_k = A + C/k + o(1/k); Richardson in 1/k over the last entries
  std::vector<double> extrap;
  const int k0 = 8;
  for (size_t i = 1; i < L.size(); ++i) {
    const double k_prev = k0 + static_cast<double>(i) - 1.0;
    const double k_cur = k0 + static_cast<double>(i);
    extrap.push_back(k_cur * L[i] - k_prev * L[i - 1]);
  }
  TailReport rep;
  const size_t m = extrap.size();
  double spread = 0.0;
  for (size_t i = m - 5; i < m - 1; ++i)
    spread = std::max(spread, std::fabs(extrap[i + 1] - extrap[i]));
  if (spread < 1e-3 && std::isfinite(extrap.back())) {
    rep.heavy = true;
    rep.limit_estimate = extrap.back();
    rep.delta_floor = rep.limit_estimate + 1.0;
  } else {
    rep.heavy = false;
    rep.limit_estimate = kInf;
    rep.delta_floor = kInf;
  }
  return rep;
}

}  // namespace hgmix
