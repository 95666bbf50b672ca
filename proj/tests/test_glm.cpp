#include <doctest.h>

#include <cmath>
#include <random>

#include "hgmix/glm.hpp"

using namespace hgmix;

namespace {

// small synthetic portfolio with known Poisson structure
std::vector<RiskRecord> synthetic_records(size_t n, unsigned seed, double beta0,
                                          double kilo_effect) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> k(1, 5), z(1, 7), bo(1, 7), mk(1, 9);
  std::lognormal_distribution<double> expo(2.0, 1.0);
  std::vector<RiskRecord> out(n);
  for (auto& r : out) {
    r.kilometres = k(rng);
    r.zone = z(rng);
    r.bonus = bo(rng);
    r.make = mk(rng);
    r.exposure = expo(rng);
    const double mu =
        r.exposure * std::exp(beta0 + (r.kilometres >= 2 ? kilo_effect : 0.0));
    std::poisson_distribution<long> pois(mu);
    r.claims = pois(rng);
    r.payment = 1000.0 * r.claims;
  }
  return out;
}

}  // namespace

TEST_CASE("encode_design columns and baselines") {
  std::vector<RiskRecord> rec(2);
  rec[0] = {1, 1, 1, 1, 2.0, 0, 0.0};
  rec[1] = {3, 2, 7, 9, 5.0, 1, 100.0};
  const auto d = encode_design(rec);
  CHECK(d.X.cols() == 25);
  CHECK(d.names.size() == 25);
  // pure baseline row has indicators all zero
  for (int j = 1; j < 25; ++j) CHECK(d.X(0, j) == 0.0);
  CHECK(d.X(0, 0) == 1.0);
  // exactly one KILO indicator set for level 3
  double kilo_sum = 0.0;
  for (int j = 1; j <= 4; ++j) kilo_sum += d.X(1, j);
  CHECK(kilo_sum == 1.0);
  CHECK(d.X(1, 2) == 1.0);  // KILO3
  CHECK(d.offset(1) == doctest::Approx(std::log(5.0)));
}

TEST_CASE("record validation names the offending row") {
  std::vector<RiskRecord> rec(1);
  rec[0] = {6, 1, 1, 1, 2.0, 0, 0.0};
  CHECK_THROWS_AS(encode_design(rec), std::domain_error);
  rec[0] = {1, 1, 1, 1, 0.0, 0, 0.0};
  CHECK_THROWS_AS(encode_design(rec), std::domain_error);
}

TEST_CASE("poisson fit satisfies the score equations") {
  const auto rec = synthetic_records(800, 17, -1.0, 0.4);
  const auto fit = fit_poisson(rec);
  const auto d = encode_design(rec);
  // sum_i (y_i - mu_i) x_ij = 0 at the optimum
  for (int j = 0; j < d.X.cols(); ++j) {
    double score = 0.0;
    for (long i = 0; i < d.X.rows(); ++i) score += (d.y(i) - fit.mu(i)) * d.X(i, j);
    CHECK(std::fabs(score) < 1e-6);
  }
  // intercept equation means fitted total equals observed total
  CHECK(fit.mu.sum() == doctest::Approx(d.y.sum()).epsilon(1e-9));
  // z values recompute exactly
  for (long j = 0; j < fit.beta.size(); ++j)
    CHECK(fit.z(j) == doctest::Approx(fit.beta(j) / fit.se(j)));
}

TEST_CASE("offset correctness: scaling exposures shifts only the intercept") {
  auto rec = synthetic_records(500, 23, -0.7, 0.3);
  const auto fit1 = fit_poisson(rec);
  const double k = 3.7;
  for (auto& r : rec) r.exposure *= k;
  const auto fit2 = fit_poisson(rec);
  CHECK(fit2.beta(0) == doctest::Approx(fit1.beta(0) - std::log(k)).epsilon(1e-10));
  for (long j = 1; j < fit1.beta.size(); ++j)
    CHECK(fit2.beta(j) == doctest::Approx(fit1.beta(j)).epsilon(1e-9));
}

TEST_CASE("saturated single-row fit gives zero deviance") {
  std::vector<RiskRecord> rec(1);
  rec[0] = {2, 3, 1, 4, 5.0, 10, 0.0};  // claims = E * 2
  const auto fit = fit_poisson(rec);
  CHECK(fit.deviance == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.mu(0) == doctest::Approx(10.0).epsilon(1e-9));

  // identical-class rows with a constant rate also saturate
  std::vector<RiskRecord> rec4(4);
  for (int i = 0; i < 4; ++i) rec4[i] = {1, 1, 1, 1, 2.0 + i, (long)(2 * (2 + i)), 0.0};
  const auto fit4 = fit_poisson(rec4);
  CHECK(fit4.deviance == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit4.beta(0) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("negbin degenerates to Poisson on equidispersed data") {
  const auto rec = synthetic_records(1500, 31, -0.5, 0.2);
  const auto fit = fit_negbin(rec);
  // sampling noise can leave a finite but enormous r instead of the flag
  CHECK((fit.poisson_equivalent || (fit.r_hat && *fit.r_hat > 500.0)));
}

TEST_CASE("negbin with overdispersion recovers r within 3 SEs") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> k(1, 5), z(1, 7), bo(1, 7), mk(1, 9);
  std::lognormal_distribution<double> expo(2.5, 1.0);
  const double r_true = 8.0, beta0 = -1.2;
  std::vector<RiskRecord> rec(2182);
  for (auto& rr : rec) {
    rr.kilometres = k(rng);
    rr.zone = z(rng);
    rr.bonus = bo(rng);
    rr.make = mk(rng);
    rr.exposure = expo(rng);
    const double mu = rr.exposure * std::exp(beta0 + 0.2 * (rr.kilometres - 1));
    std::gamma_distribution<double> gam(r_true, mu / r_true);
    std::poisson_distribution<long> pois(gam(rng));
    rr.claims = pois(rng);
  }
  const auto fit = fit_negbin(rec);
  REQUIRE(fit.r_hat.has_value());
  REQUIRE(fit.r_se.has_value());
  CHECK(std::fabs(*fit.r_hat - r_true) < 3.0 * *fit.r_se);
}

TEST_CASE("model II collapses to model I when r is enormous") {
  const auto rec = synthetic_records(600, 41, -0.8, 0.25);
  const auto p = fit_poisson(rec);
  // compare against NB deviance path with a fixed huge r via the profile start
  const auto nb = fit_negbin(rec);
  if (nb.poisson_equivalent) {
    for (long j = 0; j < p.beta.size(); ++j)
      CHECK(nb.beta(j) == doctest::Approx(p.beta(j)).epsilon(1e-6));
  }
}

TEST_CASE("derive_mixing_sample transforms") {
  const auto rec = synthetic_records(300, 53, -0.6, 0.2);
  const auto fit = fit_poisson(rec);
  const auto lam = derive_mixing_sample(fit, MixingSample::Kind::lambda);
  CHECK(lam.values.size() == 300);
  for (double v : lam.values) CHECK(v > 0.0);
  CHECK_THROWS_AS(derive_mixing_sample(fit, MixingSample::Kind::p), std::domain_error);

  const auto nb = fit_negbin(rec);
  if (nb.r_hat) {
    const auto ps = derive_mixing_sample(nb, MixingSample::Kind::p);
    for (double v : ps.values) CHECK((v > 0.0 && v < 1.0));
    // mu = r maps to p = 1/2
    const double r = *nb.r_hat;
    CHECK(r / (r + r) == doctest::Approx(0.5));
  }
}

TEST_CASE("subset_search covers all 16 subsets with exact AIC arithmetic") {
  const auto rec = synthetic_records(400, 61, -0.9, 0.3);
  const auto table = subset_search(rec, "Poisson");
  CHECK(table.size() == 16);
  bool saw_intercept_only = false;
  for (const auto& row : table) {
    if (row.subset == "1") {
      saw_intercept_only = true;
      CHECK(row.aic == doctest::Approx(row.bic - (std::log(400.0) - 2.0)).epsilon(1e-10));
    }
  }
  CHECK(saw_intercept_only);
}
