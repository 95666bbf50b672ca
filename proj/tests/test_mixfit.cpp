#include <doctest.h>

#include <cmath>
#include <random>

#include "hgmix/mixfit.hpp"
#include "hgmix/quadrature.hpp"

using namespace hgmix;

TEST_CASE("waring lambda density cross-checks the generic Theorem-4 route") {
  // Waring(1,1) mixing density equals the Poisson mixture over Beta(1,1)
  const BaseDensity base = make_base_density(BetaMix(1.0, 1.0));
  for (double lam : {0.2, 1.0, 5.0, 40.0}) {
    CHECK(lambda_density("Waring", {1.0, 1.0}, lam) ==
          doctest::Approx(poisson_mix_density(base, lam)).epsilon(1e-9));
  }
}

TEST_CASE("lambda densities integrate to one") {
  for (const auto& [fam, params] :
       std::vector<std::pair<std::string, std::vector<double>>>{
           {"Waring", {3.7, 0.72}},
           {"GZY", {0.065, 0.92, 25.7}},
       }) {
    const double mass = integrate_halfline(
        [&](double lam) {
          return lam > 0 ? lambda_density(fam, params, lam) : 0.0;
        },
        QuadratureSpec(1e-10, 1e-7, 6000));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("p density at moderate r integrates to one and tends to the base at r->1") {
  const std::vector<double> params = {2.0, 1.5};
  const double mass = integrate_unit(
      [&](double p) {
        return (p > 0 && p < 1) ? p_density_at_r("Waring", params, 8.0, p) : 0.0;
      },
      QuadratureSpec(1e-10, 1e-7, 6000));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));

  const BaseDensity base = make_base_density(BetaMix(2.0, 1.5));
  for (double p : {0.1, 0.4, 0.8})
    CHECK(p_density_at_r("Waring", params, 1.0 + 1e-6, p) ==
          doctest::Approx(std::exp(base.log_pdf(p))).epsilon(1e-4));
  CHECK_THROWS_AS(p_density_at_r("Waring", params, 0.9, 0.5), std::domain_error);
}

TEST_CASE("p-cell and lambda-cell geometries agree under mu = r p/(1-p)") {
  const double r = 110.5986;
  for (long n = 0; n <= 20; ++n) {
    // p boundary n/(n+r) maps to mu = n exactly
    const double p_lo = n / (n + r);
    const double mu = r * p_lo / (1.0 - p_lo);
    CHECK(mu == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("fit_mixing recovers Waring parameters from inverse-cdf draws") {
  // sample from the Waring lambda density by inverting its cdf on a grid
  const double a = 3.0, b = 1.4;
  std::vector<double> grid, cdf;
  double acc = 0.0;
  double prev = 0.0;
  for (double x = 0.002; x < 4000.0; x *= 1.03) {
    const double f = lambda_density("Waring", {a, b}, 0.5 * (prev + x));
    acc += f * (x - prev);
    grid.push_back(x);
    cdf.push_back(acc);
    prev = x;
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.0, cdf.back() * 0.9999);
  MixingSample sample;
  sample.kind = MixingSample::Kind::lambda;
  sample.values.resize(10000);
  for (auto& v : sample.values) {
    const double u = unif(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    v = grid[it - cdf.begin()];
  }
  MixingTarget target;
  target.family = "Waring";
  target.kind = MixingSample::Kind::lambda;
  const auto fit = fit_mixing(sample, target);
  REQUIRE(fit.converged);
  REQUIRE(fit.std_errors.size() == 2);
  CHECK(std::fabs(fit.estimates[0] - a) < 3.0 * fit.std_errors[0]);
  CHECK(std::fabs(fit.estimates[1] - b) < 3.0 * fit.std_errors[1]);
}

TEST_CASE("fit_mixing validates its inputs") {
  MixingSample empty;
  MixingTarget t;
  t.family = "Waring";
  CHECK_THROWS_AS(fit_mixing(empty, t), std::domain_error);

  MixingSample bad;
  bad.kind = MixingSample::Kind::p;
  bad.values = {0.5, 1.5};
  MixingTarget tp;
  tp.family = "Waring";
  tp.kind = MixingSample::Kind::p;
  tp.r_hat = 10.0;
  CHECK_THROWS_AS(fit_mixing(bad, tp), std::domain_error);

  MixingSample ok;
  ok.kind = MixingSample::Kind::p;
  ok.values = {0.2, 0.4};
  MixingTarget no_r;
  no_r.family = "Waring";
  no_r.kind = MixingSample::Kind::p;
  CHECK_THROWS_AS(fit_mixing(ok, no_r), std::domain_error);
}
