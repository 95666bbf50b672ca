#include <doctest.h>

#include <cmath>

#include "hgmix/calibrative.hpp"
#include "hgmix/quadrature.hpp"

using namespace hgmix;

TEST_CASE("calibrate_up tends to the base density as r -> 1+") {
  const BaseDensity base = make_base_density(BetaMix(1.6, 2.4));
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    CHECK(calibrate_up(base, 1.0 + 1e-6, p) ==
          doctest::Approx(std::exp(base.log_pdf(p))).epsilon(1e-4));
  }
}

TEST_CASE("calibrate_up at r=2 reproduces the Waring mixture") {
  const BaseDensity base = make_base_density(BetaMix(2.0, 3.0));
  auto dens = [&](double p) { return calibrate_up(base, 2.0, p); };
  const auto rep = verify_mixture(Waring(2.0, 3.0), dens, 2.0, 30, 1e-8);
  CHECK(rep.passed);
  CHECK(rep.max_abs_error < 1e-8);
}

TEST_CASE("calibrate_general sign structure from the corollaries") {
  // Beta(0.5,1), r=0.7 >= a: proper, non-negative on a grid
  {
    const BaseDensity base = make_base_density(BetaMix(0.5, 1.0));
    for (int i = 1; i <= 200; ++i)
      CHECK(calibrate_general(base, 0.7, i / 201.0) >= 0.0);
  }
  // Beta(1,1), r=0.5: negative near p = 0
  {
    const BaseDensity base = make_base_density(BetaMix(1.0, 1.0));
    CHECK(calibrate_general(base, 0.5, 1e-3) < 0.0);
  }
  // SigmaB(b, c), r=0.5: negative near 0
  {
    const BaseDensity base = make_base_density(SigmaBMix(1.2, 0.8));
    CHECK(calibrate_general(base, 0.5, 1e-3) < 0.0);
  }
}

TEST_CASE("classify on the worked fixtures") {
  CHECK(classify(make_base_density(BetaMix(2.0, 1.0)), 0.5).verdict == Verdict::QuasiPDF);
  CHECK(classify(make_base_density(BetaMix(0.5, 1.0)), 0.7).verdict == Verdict::ProperPDF);
  const auto kum = classify(make_base_density(Kumaraswamy(0.5, 0.3)), 0.3);
  CHECK(kum.verdict == Verdict::QuasiPDF);
  REQUIRE(kum.witness.has_value());
  CHECK(kum.witness->second <= -1e-12);
  CHECK_THROWS_AS(classify(make_base_density(BetaMix(1, 1)), 1.5), std::domain_error);
}

TEST_CASE("poisson_mix_density closed-form cross-checks") {
  // base Beta(a,b): equals Int y^b/(y+1)^(a+b) e^(-y u) dy / B(a,b)
  const double a = 2.2, b = 1.4;
  const BaseDensity base = make_base_density(BetaMix(a, b));
  for (double lam : {0.3, 1.0, 4.0}) {
    const double direct = integrate_halfline([&](double y) {
      return std::exp(b * std::log(y) - (a + b) * std::log1p(y) - lam * y);
    }) / std::exp(log_beta(a, b));
    CHECK(poisson_mix_density(base, lam) == doctest::Approx(direct).epsilon(1e-10));
  }
  // base SigmaB(b,c): equals the (y+1) kernel form
  const double bb = 1.3, cc = 2.0;
  const BaseDensity sb = make_base_density(SigmaBMix(bb, cc));
  const double S = sigma_b(SigmaBArgs(1.0 / cc, 1.0 / cc, bb), 1e-13);
  for (double lam : {0.5, 2.0}) {
    const double direct = cc / S * integrate_halfline([&](double y) {
      return std::exp(-std::log1p(y) + bb * std::log(-std::expm1(-cc * std::log1p(y))) -
                      lam * y);
    });
    CHECK(poisson_mix_density(sb, lam) == doctest::Approx(direct).epsilon(1e-9));
  }
  // base SigmaBLimit(b): the ln(y+1) kernel form
  const double lb = 1.6;
  const BaseDensity sbl = make_base_density(SigmaBLimitMix(lb));
  const double norm = riemann_zeta(lb + 1.0) * std::exp(log_gamma(lb + 1.0));
  for (double lam : {0.5, 2.0}) {
    const double direct = integrate_halfline([&](double y) {
      return std::exp(-std::log1p(y) + lb * std::log(std::log1p(y)) - lam * y);
    }) / norm;
    CHECK(poisson_mix_density(sbl, lam) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("tail_index classifies the worked examples") {
  const auto gb1 = tail_index(make_base_density(GB1(0.9, 1.8, 1.4)));
  CHECK(gb1.heavy);
  CHECK(gb1.limit_estimate == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(gb1.delta_floor == doctest::Approx(1.8).epsilon(1e-3));

  const auto sb = tail_index(make_base_density(SigmaBMix(1.4, 2.0)));
  CHECK(sb.heavy);
  CHECK(sb.limit_estimate == doctest::Approx(0.4).epsilon(1e-3));

  const auto ln = tail_index(make_base_density(LogitNormal(0.0, 1.0)));
  CHECK_FALSE(ln.heavy);
  CHECK(std::isinf(ln.limit_estimate));
}

TEST_CASE("verify_mixture flags a broken density") {
  // Deliberately wrong density: uniform cannot reproduce Yule(2)
  auto uniform = [](double) { return 1.0; };
  const auto rep = verify_mixture(Yule(2.0), uniform, 1.0, 10, 1e-7);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_abs_error > 1e-3);
}

TEST_CASE("BaseDensity endpoint metadata") {
  const auto beta_low = make_base_density(BetaMix(0.5, 2.0));
  CHECK(beta_low.infinite_at_zero);
  CHECK(beta_low.tail_exponent_zero == doctest::Approx(0.5));
  CHECK(beta_low.tail_exponent_one == doctest::Approx(1.0));

  const auto sbl = make_base_density(SigmaBLimitMix(2.0));
  CHECK(sbl.infinite_at_zero);
  CHECK(sbl.tail_exponent_zero == doctest::Approx(0.0));

  const auto ln = make_base_density(LogitNormal(0.0, 1.0));
  CHECK_FALSE(ln.infinite_at_zero);
  CHECK(ln.value_at_zero == 0.0);
}
