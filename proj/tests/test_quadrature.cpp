#include <doctest.h>

#include <cmath>
#include <random>

#include "hgmix/quadrature.hpp"

using namespace hgmix;

TEST_CASE("integrate_unit basics") {
  CHECK(integrate_unit([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
  QuadratureSpec sing(1e-13, 1e-10, 4000, EndpointSingularity::left_power, -0.5);
  CHECK(integrate_unit([](double p) { return 1.0 / std::sqrt(p); }, sing) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("integrate_unit reproduces a Sigma_B normalization") {
  // Int (1-p^c)^b/(1-p) dp = Sigma_B(1/c,1/c,b)/c for (b,c) = (2,3)
  const double b = 2.0, c = 3.0;
  const double direct = integrate_unit([&](double p) {
    return std::pow(-std::expm1(c * std::log(p)), b) / (1.0 - p);
  });
  CHECK(direct == doctest::Approx(sigma_b(SigmaBArgs(1.0 / c, 1.0 / c, b), 1e-13) / c)
                      .epsilon(1e-10));
}

TEST_CASE("integrate_halfline basics") {
  CHECK(integrate_halfline([](double y) { return std::exp(-y); }) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_halfline([](double y) { return y * y * std::exp(-2.0 * y); }) ==
        doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("unit and half-line integrals agree under y = (1-p)/p") {
  // randomized smooth integrands g(y) = exp(-a y) * y^m / (1+y)^k
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.5, 3.0);
  std::uniform_int_distribution<int> um(0, 3), uk(4, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = ua(rng);
    const int m = um(rng), k = uk(rng);
    auto g = [&](double y) { return std::exp(-a * y) * std::pow(y, m) / std::pow(1.0 + y, k); };
    const double half = integrate_halfline(g);
    const double unit = integrate_unit([&](double p) {
      const double y = (1.0 - p) / p;
      return g(y) / (p * p);
    });
    CHECK(half == doctest::Approx(unit).epsilon(1e-9));
  }
}

TEST_CASE("cross-check against a closed Laplace-type integral") {
  // Int y/(y+1)^2 e^-y dy computed both ways
  auto f = [](double y) { return y / ((y + 1.0) * (y + 1.0)) * std::exp(-y); };
  const double a = integrate_halfline(f);
  const double b = integrate_unit([&](double p) {
    const double y = (1.0 - p) / p;
    return f(y) / (p * p);
  });
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("non-convergence carries the best estimate") {
  QuadratureSpec tight(1e-30, 1e-16, 8);
  try {
    integrate([](double x) { return std::sin(50.0 / (x + 0.01)); }, 0.0, 1.0, tight);
    FAIL("expected accuracy_error");
  } catch (const accuracy_error& e) {
    CHECK(std::isfinite(e.best_estimate));
    CHECK(e.error_bound > 0.0);
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(QuadratureSpec(0.0, 1e-10), std::domain_error);
  CHECK_THROWS_AS(QuadratureSpec(1e-10, 1e-10, 100, EndpointSingularity::left_power, -1.5),
                  std::domain_error);
}
