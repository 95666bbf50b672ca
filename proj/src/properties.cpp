#include "hgmix/properties.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "hgmix/calibrative.hpp"
#include "hgmix/distributions.hpp"
#include "hgmix/quadrature.hpp"

namespace hgmix {

namespace {

using Check = PropertyResult;

Check check_err(const std::string& name, double err, double tol, const std::string& detail = "") {
  Check c;
  c.name = name;
  c.measured = err;
  c.threshold = tol;
  c.passed = err < tol;
  c.detail = detail;
  return c;
}

Check check_flag(const std::string& name, bool ok, const std::string& detail = "") {
  Check c;
  c.name = name;
  c.measured = ok ? 0.0 : 1.0;
  c.threshold = 0.5;
  c.passed = ok;
  c.detail = detail;
  return c;
}

// Total mass of a density on (0,1) whose endpoint powers match the base's;
// the integrand is guarded and the powers are substituted away.
double density_mass(const BaseDensity& base, const std::function<double(double)>& f) {
  const double le = std::isfinite(base.tail_exponent_zero) ? -base.tail_exponent_zero : 0.0;
  const double re = std::isfinite(base.tail_exponent_one) ? base.tail_exponent_one : 0.0;
  QuadratureSpec lspec(1e-12, 1e-9, 6000,
                       le < 0.0 ? EndpointSingularity::left_power : EndpointSingularity::none,
                       le);
  QuadratureSpec rspec(1e-12, 1e-9, 6000,
                       re < 0.0 ? EndpointSingularity::left_power : EndpointSingularity::none,
                       re);
  auto guarded = [&f](double p) { return (p > 0.0 && p < 1.0) ? f(p) : 0.0; };
  const double lo = integrate_unit([&](double s) { return 0.5 * guarded(0.5 * s); }, lspec);
  const double hi = integrate_unit([&](double s) { return 0.5 * guarded(1.0 - 0.5 * s); }, rspec);
  return lo + hi;
}

std::function<double(double)> as_density(const BaseDensity& b) {
  return [b](double p) { return std::exp(b.log_pdf(p)); };
}


Check guarded_check(const std::string& name, const std::function<Check()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    Check c;
    c.name = name;
    c.passed = false;
    c.measured = std::numeric_limits<double>::quiet_NaN();
    c.threshold = 0.0;
    c.detail = std::string("threw: ") + e.what();
    return c;
  }
}

}  // namespace

std::vector<PropertyResult> run_property_suite() {
  std::vector<Check> out;
  std::mt19937_64 rng(20250809);
  auto draw = [&](double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
  };

  // --- mixture reconstruction (geometric mixtures of the named densities) ---
  out.push_back(guarded_check("mixture/yule_from_beta", [&]() -> Check {
    double worst = 0.0;
    for (double b : {0.7, 1.5}) {
      auto rep = verify_mixture(Yule(b), as_density(make_base_density(BetaMix(1.0, b))), 1.0,
                                30, 1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("mixture/yule_from_beta", worst, 1e-7);
  }));
  out.push_back(guarded_check("mixture/zy_from_sigma_b", [&]() -> Check {
    double worst = 0.0;
    for (auto [b, c] : {std::pair{1.2, 2.5}, std::pair{0.8, 0.6}}) {
      auto rep = verify_mixture(ZY(b, c), as_density(make_base_density(SigmaBMix(b, c))), 1.0,
                                30, 1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("mixture/zy_from_sigma_b", worst, 1e-7);
  }));
  out.push_back(guarded_check("mixture/zeta_limit_from_sigma_b_limit", [&]() -> Check {
    double worst = 0.0;
    for (double b : {0.9, 2.0}) {
      auto rep = verify_mixture(ZY(b, 0.0), as_density(make_base_density(SigmaBLimitMix(b))),
                                1.0, 30, 1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("mixture/zeta_limit_from_sigma_b_limit", worst, 1e-7);
  }));
  out.push_back(guarded_check("mixture/gzy_from_g_sigma_b", [&]() -> Check {
    double worst = 0.0;
    for (auto [a, b, c] : {std::tuple{0.8, 1.1, 2.0}, std::tuple{1.4, 0.9, 0.7}}) {
      auto rep = verify_mixture(GZY(a, b, c), as_density(make_base_density(GSigmaB(a, b, c))),
                                1.0, 25, 1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("mixture/gzy_from_g_sigma_b", worst, 1e-7);
  }));
  out.push_back(guarded_check("mixture/hgzy_from_hg_sigma_b", [&]() -> Check {
    double worst = 0.0;
    for (auto [a, b, c, d] : {std::tuple{0.8, 1.1, 2.0, 1.7}, std::tuple{1.2, 0.9, 0.8, 0.5}}) {
      auto rep = verify_mixture(HGZY(a, b, c, d),
                                as_density(make_base_density(HGSigmaB(a, b, c, d))), 1.0, 25,
                                1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("mixture/hgzy_from_hg_sigma_b", worst, 1e-7);
  }));

  // --- calibrative r-invariance: same Waring mixture for every r ---
  out.push_back(guarded_check("calibrative/waring_r_invariance", [&]() -> Check {
    const BaseDensity base = make_base_density(BetaMix(2.0, 3.0));
    double worst = 0.0;
    for (double r : {1.5, 2.0, 4.0}) {
      auto dens = [&](double p) { return calibrate_up(base, r, p); };
      auto rep = verify_mixture(Waring(2.0, 3.0), dens, r, 30, 1e-7);
      worst = std::max(worst, rep.max_abs_error);
    }
    return check_err("calibrative/waring_r_invariance", worst, 1e-7);
  }));

  // --- calibrate_up against the closed Corollary-1(A)(1) integral ---
  out.push_back(guarded_check("calibrative/corollary1A1_closed_integral", [&]() -> Check {
    const double b = 1.0, c = 1.0, r = 3.0;
    const BaseDensity base = make_base_density(SigmaBMix(b, c));
    const double S = sigma_b(SigmaBArgs(1.0 / c, 1.0 / c, b), 1e-14);
    double worst = 0.0;
    for (double p : {0.05, 0.3, 0.7}) {
      const double direct =
          c * (r - 1.0) / (S * std::pow(1.0 - p, r)) *
          integrate([&](double w) {
            return std::pow(w - p, r - 2.0) * std::pow(-std::expm1(c * std::log(w)), b) *
                   std::pow(w, 1.0 - r);
          }, p, 1.0, QuadratureSpec(1e-14, 1e-12, 6000));
      worst = std::max(worst, std::fabs(calibrate_up(base, r, p) - direct));
    }
    return check_err("calibrative/corollary1A1_closed_integral", worst, 1e-10);
  }));

  // --- calibrated densities integrate to 1 ---
  out.push_back(guarded_check("calibrative/calibrate_up_total_mass", [&]() -> Check {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double a = draw(0.5, 3.0), b = draw(0.5, 3.0);
      const double r = draw(1.2, 8.0);
      const BaseDensity base = make_base_density(BetaMix(a, b));
      const double mass = density_mass(base, [&](double p) { return calibrate_up(base, r, p); });
      worst = std::max(worst, std::fabs(mass - 1.0));
    }
    return check_err("calibrative/calibrate_up_total_mass", worst, 1e-7);
  }));
  out.push_back(guarded_check("calibrative/calibrate_general_signed_mass", [&]() -> Check {
    // signed mass of the r<1 member is still 1, quasi-PDF or not
    double worst = 0.0;
    for (auto [a, b, r] : {std::tuple{1.0, 1.0, 0.5}, std::tuple{0.5, 1.0, 0.7},
                           std::tuple{2.0, 1.5, 0.6}}) {
      const BaseDensity base = make_base_density(BetaMix(a, b));
      const double mass =
          density_mass(base, [&](double p) { return calibrate_general(base, r, p); });
      worst = std::max(worst, std::fabs(mass - 1.0));
    }
    return check_err("calibrative/calibrate_general_signed_mass", worst, 1e-6);
  }));

  // --- classifier verdicts on the worked fixtures, cross-checked with signs ---
  out.push_back(guarded_check("calibrative/classifier_verdicts", [&]() -> Check {
    struct Fixture {
      MixingModel m;
      double r;
      Verdict expect;
      const char* tag;
    };
    const std::vector<Fixture> fixtures = {
        {BetaMix(1.0, 1.0), 0.5, Verdict::QuasiPDF, "beta(1,1) r=0.5"},
        {BetaMix(2.0, 1.5), 0.6, Verdict::QuasiPDF, "beta(2,1.5) r=0.6"},
        {BetaMix(0.5, 1.0), 0.7, Verdict::ProperPDF, "beta(0.5,1) r=0.7"},
        {BetaMix(0.3, 2.0), 0.5, Verdict::ProperPDF, "beta(0.3,2) r=0.5"},
        {SigmaBMix(1.2, 0.8), 0.5, Verdict::QuasiPDF, "sigma_b(1.2,0.8) r=0.5"},
        {SigmaBLimitMix(1.1), 0.5, Verdict::QuasiPDF, "sigma_b_limit(1.1) r=0.5"},
        {Kumaraswamy(0.5, 0.3), 0.3, Verdict::QuasiPDF, "kumaraswamy(0.5,0.3) r=0.3"},
    };
    bool all_ok = true;
    std::ostringstream detail;
    for (const auto& fx : fixtures) {
      const BaseDensity base = make_base_density(fx.m);
      const ClassifyResult res = classify(base, fx.r);
      bool ok = res.verdict == fx.expect;
      // agreement with direct signs near zero
      double min_val = 0.0;
      for (double p : {1e-4, 1e-3, 1e-2})
        min_val = std::min(min_val, calibrate_general(base, fx.r, p));
      if (fx.expect == Verdict::QuasiPDF) ok = ok && min_val < 0.0 && res.witness.has_value();
      if (fx.expect == Verdict::ProperPDF) ok = ok && min_val >= 0.0;
      if (!ok) {
        all_ok = false;
        detail << fx.tag << " ";
      }
    }
    return check_flag("calibrative/classifier_verdicts", all_ok, detail.str());
  }));

  // --- proper-PDF grid positivity for the Corollary-3(2) case ---
  out.push_back(guarded_check("calibrative/corollary3_grid_nonnegative", [&]() -> Check {
    const BaseDensity base = make_base_density(BetaMix(0.5, 1.0));
    double min_val = 0.0;
    for (int i = 1; i <= 200; ++i)
      min_val = std::min(min_val, calibrate_general(base, 0.7, i / 201.0));
    return check_flag("calibrative/corollary3_grid_nonnegative", min_val >= 0.0);
  }));

  // --- Theorem-4 composition: Poisson mixture reproduces the count pmf ---
  out.push_back(guarded_check("calibrative/poisson_mixture_composition", [&]() -> Check {
    const double b = 1.5;
    const BaseDensity base = make_base_density(BetaMix(1.0, b));
    PmfEvaluator ev{CountModel(Yule(b))};
    double worst = 0.0;
    for (int x = 0; x <= 20; ++x) {
      const double lgx = log_gamma(x + 1.0);
      auto f = [&](double lam) {
        return std::exp(-lam + x * std::log(lam) - lgx) * poisson_mix_density(base, lam);
      };
      const double mixed =
          integrate_halfline(f, QuadratureSpec(1e-12, 1e-9, 6000));
      worst = std::max(worst, std::fabs(mixed - std::exp(ev.log_pmf(x))));
    }
    return check_err("calibrative/poisson_mixture_composition", worst, 1e-7);
  }));

  // --- hierarchy: every specialization edge agrees pointwise ---
  out.push_back(guarded_check("hierarchy/figure1_edges", [&]() -> Check {
    double worst = 0.0;
    std::ostringstream detail;
    auto check_edge = [&](const CountModel& parent, const char* tag) {
      auto red = reduce(parent);
      if (!red) {
        detail << tag << ":no-edge ";
        worst = std::max(worst, 1.0);
        return;
      }
      PmfEvaluator pe(parent), ce(*red);
      for (long x = 0; x <= 100; ++x)
        worst = std::max(worst, std::fabs(pe.log_pmf(x) - ce.log_pmf(x)));
    };
    for (int i = 0; i < 5; ++i) {
      const double a = draw(0.3, 3.0), b = draw(0.3, 3.0), c = draw(0.3, 3.0);
      check_edge(HGZY(a, b, c, 1.0), "hgzy->gzy");
      check_edge(GZY(1.0 / c, b, c), "gzy->zy");
      check_edge(ZY(b, 1.0), "zy->yule");
      check_edge(ZY(b, 0.0), "zy->zeta");
      check_edge(GW2(a, b, 1.0), "gw2->waring");
      check_edge(Waring(1.0, b), "waring->yule");
      check_edge(GeneralizedWaring(1.0, a, b), "genwaring->waring");
    }
    return check_err("hierarchy/figure1_edges", worst, 1e-10, detail.str());
  }));

  // --- ZY small-c ratio approaches the Zeta ratio ---
  out.push_back(guarded_check("hierarchy/zy_small_c_ratio_limit", [&]() -> Check {
    double worst = 0.0;
    for (double b : {0.5, 2.0}) {
      const ZY zy(b, 1e-4);
      for (long x = 0; x <= 20; ++x) {
        const double zeta_ratio = std::pow((x + 2.0) / (x + 1.0), b + 1.0);
        worst = std::max(worst, std::fabs(pmf_ratio(zy, x) - zeta_ratio) / zeta_ratio);
      }
    }
    return check_err("hierarchy/zy_small_c_ratio_limit", worst, 1e-3);
  }));

  // --- ZY flatness bound f(0)/f(1) in (1, 2^(b+1)) ---
  out.push_back(guarded_check("hierarchy/zy_flatness_bound", [&]() -> Check {
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      const double b = draw(0.2, 4.0), c = draw(0.05, 20.0);
      const double ratio = pmf_ratio(ZY(b, c), 0);
      ok = ratio > 1.0 && ratio < std::pow(2.0, b + 1.0);
    }
    return check_flag("hierarchy/zy_flatness_bound", ok);
  }));

  // --- GZY telescoping: Sigma_B difference collapses to a single beta ---
  out.push_back(guarded_check("series/sigma_b_difference_telescopes", [&]() -> Check {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double g = draw(0.05, 5.0), u = draw(0.05, 5.0), w = draw(0.3, 4.0);
      const double lhs = sigma_b_diff(g, u, u + g, w, 1e-14);
      const double rhs = std::exp(log_beta(u, w + 1.0));
      worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
    }
    return check_err("series/sigma_b_difference_telescopes", worst, 1e-10);
  }));

  // --- mixing densities normalize ---
  out.push_back(guarded_check("mixing/densities_normalize", [&]() -> Check {
    double worst = 0.0;
    const std::vector<MixingModel> models = {
        BetaMix(0.7, 1.9),       GB1(0.8, 1.2, 2.0),      Kumaraswamy(1.5, 0.7),
        SigmaBMix(1.2, 2.5),     SigmaBLimitMix(1.1),     GSigmaB(0.6, 1.3, 1.8),
        HGSigmaB(0.6, 1.3, 1.8, 0.9), LogitNormal(0.3, 1.2),
    };
    for (const auto& m : models) {
      const BaseDensity base = make_base_density(m);
      const double mass = density_mass(base, as_density(base));
      worst = std::max(worst, std::fabs(mass - 1.0));
    }
    return check_err("mixing/densities_normalize", worst, 1e-8);
  }));

  // --- tail classification ---
  out.push_back(guarded_check("tail/gb1_sigma_b_heavy_logitnormal_not", [&]() -> Check {
    const TailReport gb1 = tail_index(make_base_density(GB1(0.8, 1.7, 1.3)));
    const TailReport sb = tail_index(make_base_density(SigmaBMix(1.4, 2.0)));
    const TailReport ln = tail_index(make_base_density(LogitNormal(0.0, 1.0)));
    const bool ok = gb1.heavy && std::fabs(gb1.limit_estimate - 0.7) < 1e-3 &&
                    std::fabs(gb1.delta_floor - 1.7) < 1e-3 && sb.heavy &&
                    std::fabs(sb.limit_estimate - 0.4) < 1e-3 && !ln.heavy;
    std::ostringstream detail;
    detail << "gb1 limit " << gb1.limit_estimate << ", sigma_b limit " << sb.limit_estimate
           << ", logit-normal heavy=" << ln.heavy;
    return check_flag("tail/gb1_sigma_b_heavy_logitnormal_not", ok, detail.str());
  }));

  return out;
}

}  // namespace hgmix
