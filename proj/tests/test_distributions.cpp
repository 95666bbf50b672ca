#include <doctest.h>

#include <cmath>
#include <random>

#include "hgmix/distributions.hpp"
#include "hgmix/quadrature.hpp"

using namespace hgmix;

TEST_CASE("log_pmf worked values") {
  // Yule(1): f(x) = 1/((x+1)(x+2))
  CHECK(log_pmf(Yule(1.0), 0) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(log_pmf(Yule(1.0), 9) == doctest::Approx(std::log(1.0 / 110.0)).epsilon(1e-12));
  // Zeta(2): f(0) = 1/zeta(2), zeta(2) frozen from the series oracle
  CHECK(log_pmf(Zeta(2.0), 0) == doctest::Approx(std::log(0.6079271018540267)).epsilon(1e-10));
  // NB(1, 0.3) is Geometric(0.3)
  CHECK(log_pmf(NegativeBinomial(1.0, 0.3), 2) ==
        doctest::Approx(std::log(0.7 * 0.09)).epsilon(1e-12));
  CHECK(log_pmf(Geometric(0.3), 2) == doctest::Approx(std::log(0.063)).epsilon(1e-12));
  // Poisson closed form
  CHECK(log_pmf(Poisson(2.5), 3) ==
        doctest::Approx(3 * std::log(2.5) - 2.5 - std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("pmf_ratio worked values") {
  // ZY(b, c=0): ((x+2)/(x+1))^(b+1)
  for (long x : {0L, 3L, 17L})
    CHECK(pmf_ratio(ZY(1.3, 0.0), x) ==
          doctest::Approx(std::pow((x + 2.0) / (x + 1.0), 2.3)).epsilon(1e-12));
  // ZY(b=2, c=1), x=0: Gamma(1)Gamma(5)/(Gamma(4)Gamma(2)) = 4
  CHECK(pmf_ratio(ZY(2.0, 1.0), 0) == doctest::Approx(4.0).epsilon(1e-10));
  // Poisson(lambda): (x+1)/lambda
  CHECK(pmf_ratio(Poisson(1.7), 4) == doctest::Approx(5.0 / 1.7).epsilon(1e-10));
}

TEST_CASE("GeneralizedWaring pmf equals the printed form for x >= 1") {
  // printed form B(x+a, b+r) / (B(a,b) x B(x,r)) has a removable x=0 hole;
  // check the gamma-ratio implementation against it away from the hole
  const double r = 1.7, a = 0.8, b = 2.2;
  for (long x : {1L, 2L, 5L, 20L}) {
    const double direct = std::exp(log_beta(x + a, b + r)) /
                          (std::exp(log_beta(a, b)) * x * std::exp(log_beta((double)x, r)));
    CHECK(std::exp(log_pmf(GeneralizedWaring(r, a, b), x)) ==
          doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("reduce chains to the most specialized family") {
  auto red = reduce(HGZY(0.4, 1.1, 2.0, 1.0));
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "GZY");

  red = reduce(HGZY(0.5, 1.1, 2.0, 1.0));  // a = 1/c: chains GZY -> ZY
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "ZY");

  red = reduce(GZY(1.0, 0.9, 1.0));  // a = 1/c = 1 and c = 1: down to Yule
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "Yule");

  red = reduce(ZY(1.5, 0.0));
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "Zeta");
  CHECK(parameters(*red)[0] == doctest::Approx(2.5));

  red = reduce(GW2(0.7, 1.2, 1.0));
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "Waring");

  red = reduce(GeneralizedWaring(1.0, 1.0, 2.0));  // r=1 -> Waring, a=1 -> Yule
  REQUIRE(red.has_value());
  CHECK(family_name(*red) == "Yule");

  CHECK_FALSE(reduce(Waring(2.0, 1.0)).has_value());
  CHECK_FALSE(reduce(HGZY(0.4, 1.1, 2.0, 1.5)).has_value());
  CHECK_FALSE(reduce(Poisson(1.0)).has_value());
}

TEST_CASE("GW2 c=1 equals Waring numerically (beta identity oracle)") {
  const double a = 1.4, b = 0.8;
  PmfEvaluator gw2{CountModel(GW2(a, b, 1.0))};
  PmfEvaluator waring{CountModel(Waring(a, b))};
  for (long x = 0; x <= 50; ++x)
    CHECK(gw2.log_pmf(x) == doctest::Approx(waring.log_pmf(x)).epsilon(1e-11));
}

TEST_CASE("normalization_check certifies proper pmfs") {
  auto rep = normalization_check(Yule(1.5), 1e-8);
  CHECK(std::fabs(rep.sum + rep.tail_bound - 1.0) < 2e-8);
  CHECK(rep.sum <= 1.0 + 1e-12);

  rep = normalization_check(Poisson(3.0), 1e-10);
  CHECK(rep.sum == doctest::Approx(1.0).epsilon(1e-9));

  rep = normalization_check(GW2(1.4, 0.8, 2.5), 1e-5);
  CHECK(std::fabs(rep.sum + rep.tail_bound - 1.0) < 2e-5);

  // reference-table-scale parameters
  rep = normalization_check(ZY(1.0909, 60.8621), 1e-6);
  CHECK(std::fabs(rep.sum + rep.tail_bound - 1.0) < 2e-6);
  rep = normalization_check(HGZY(0.0049, 3.3112, 939.1870, 70.0691), 1e-6);
  CHECK(std::fabs(rep.sum + rep.tail_bound - 1.0) < 2e-6);
}

TEST_CASE("mixing densities: worked values") {
  // Beta(1,1) is uniform
  for (double p : {0.1, 0.5, 0.9})
    CHECK(mixing_log_pdf(BetaMix(1.0, 1.0), p) == doctest::Approx(0.0));
  // SigmaB(1,1) is also uniform: (1-p)/(1-p) / Sigma_B(1,1,1) = 1
  for (double p : {0.05, 0.4, 0.99})
    CHECK(mixing_log_pdf(SigmaBMix(1.0, 1.0), p) == doctest::Approx(0.0).epsilon(1e-10));
  // HGSigmaB with d=1 equals GSigmaB
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> up(1e-4, 1.0 - 1e-4);
  for (int i = 0; i < 25; ++i) {
    const double p = up(rng);
    CHECK(mixing_log_pdf(HGSigmaB(0.7, 1.2, 1.9, 1.0), p) ==
          doctest::Approx(mixing_log_pdf(GSigmaB(0.7, 1.2, 1.9), p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mixing_log_pdf(BetaMix(1, 1), 0.0), std::domain_error);
  CHECK_THROWS_AS(mixing_log_pdf(BetaMix(1, 1), 1.0), std::domain_error);
}

TEST_CASE("mixing derivative ratio matches finite differences") {
  const std::vector<MixingModel> models = {
      BetaMix(0.7, 1.9),  GB1(0.8, 1.2, 2.0), Kumaraswamy(1.5, 0.7), SigmaBMix(1.2, 2.5),
      SigmaBLimitMix(1.1), GSigmaB(0.6, 1.3, 1.8), HGSigmaB(0.6, 1.3, 1.8, 0.9),
      LogitNormal(0.3, 1.2)};
  for (const auto& m : models) {
    for (double p : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double h = 1e-6;
      const double fd =
          (mixing_log_pdf(m, p + h) - mixing_log_pdf(m, p - h)) / (2.0 * h);
      CHECK(mixing_dlog_pdf(m, p) == doctest::Approx(fd).epsilon(2e-5));
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Zeta(1.0), std::domain_error);
  CHECK_THROWS_AS(Yule(0.0), std::domain_error);
  CHECK_THROWS_AS(ZY(1.0, 1e-7), std::domain_error);  // degenerate small c
  CHECK_NOTHROW(ZY(1.0, 0.0));                        // explicit limit variant
  CHECK_THROWS_AS(NegativeBinomial(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(HGZY(1.0, 1.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(make_count_model("Waring", {1.0}), std::domain_error);
  CHECK_THROWS_AS(make_count_model("NoSuch", {1.0}), std::domain_error);
  CHECK_THROWS_AS(log_pmf(Yule(1.0), -1), std::domain_error);
}

TEST_CASE("geometric_mixture_of maps each density to its count family") {
  CHECK(family_name(*geometric_mixture_of(BetaMix(2, 3))) == "Waring");
  CHECK(family_name(*geometric_mixture_of(GB1(1, 2, 3))) == "GW2");
  CHECK(family_name(*geometric_mixture_of(SigmaBMix(1, 2))) == "ZY");
  CHECK(family_name(*geometric_mixture_of(SigmaBLimitMix(1.0))) == "ZY");
  CHECK(family_name(*geometric_mixture_of(GSigmaB(1, 2, 3))) == "GZY");
  CHECK(family_name(*geometric_mixture_of(HGSigmaB(1, 2, 3, 4))) == "HGZY");
  CHECK_FALSE(geometric_mixture_of(LogitNormal(0, 1)).has_value());
}
