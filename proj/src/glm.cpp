#include "hgmix/glm.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <limits>
#include <sstream>

#include "hgmix/special.hpp"

namespace hgmix {

namespace {

struct FactorSpec {
  const char* tag;
  int RiskRecord::* field;
  int levels;
};

const FactorSpec kFactors[4] = {
    {"KILO", &RiskRecord::kilometres, 5},
    {"ZONE", &RiskRecord::zone, 7},
    {"BONUS", &RiskRecord::bonus, 7},
    {"MAKE", &RiskRecord::make, 9},
};

DesignMatrix encode_subset(const std::vector<RiskRecord>& records, unsigned mask) {
  if (records.empty()) throw std::domain_error("encode_design: no records");
  long line = 0;
  for (const auto& r : records) validate_record(r, ++line);

  const long n = static_cast<long>(records.size());
  int cols = 1;
  for (int fi = 0; fi < 4; ++fi)
    if (mask & (1u << fi)) cols += kFactors[fi].levels - 1;

  DesignMatrix d;
  d.X = Eigen::MatrixXd::Zero(n, cols);
  d.offset.resize(n);
  d.y.resize(n);
  d.names.assign(1, "Intercept");
  for (int fi = 0; fi < 4; ++fi) {
    if (!(mask & (1u << fi))) continue;
    for (int lv = 2; lv <= kFactors[fi].levels; ++lv) {
      std::ostringstream os;
      os << kFactors[fi].tag << lv;
      d.names.push_back(os.str());
    }
  }
  for (long i = 0; i < n; ++i) {
    const auto& r = records[i];
    d.X(i, 0) = 1.0;
    int col = 1;
    for (int fi = 0; fi < 4; ++fi) {
      if (!(mask & (1u << fi))) continue;
      const int lv = r.*kFactors[fi].field;
      if (lv >= 2) d.X(i, col + lv - 2) = 1.0;
      col += kFactors[fi].levels - 1;
    }
    d.offset(i) = std::log(r.exposure);
    d.y(i) = static_cast<double>(r.claims);
  }
  return d;
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double ll = 0.0;
  for (long i = 0; i < y.size(); ++i)
    ll += y(i) * std::log(mu(i)) - mu(i) - log_gamma(y(i) + 1.0);
  return ll;
}

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    const double t = y(i) > 0.0 ? y(i) * std::log(y(i) / mu(i)) : 0.0;
    dev += 2.0 * (t - (y(i) - mu(i)));
  }
  return dev;
}

double nb_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double r) {
  const double lgr = log_gamma(r);
  double ll = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    const double m = mu(i);
    ll += log_gamma(y(i) + r) - lgr - log_gamma(y(i) + 1.0) + r * std::log(r / (r + m)) +
          y(i) * std::log(m / (r + m));
  }
  return ll;
}

double nb_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double r) {
  double dev = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    const double t = y(i) > 0.0 ? y(i) * std::log(y(i) / mu(i)) : 0.0;
    dev += 2.0 * (t - (y(i) + r) * std::log((y(i) + r) / (mu(i) + r)));
  }
  return dev;
}

struct IrlsOut {
  Eigen::VectorXd beta;
  Eigen::VectorXd mu;
  Eigen::MatrixXd xtwx;
  double deviance = 0.0;
};

// IRLS for the log link with offset. r = +inf selects the Poisson variance.
// An underdetermined design (fewer covariate classes than columns) gets the
// minimum-norm solution; genuine collinearity among the observed classes is
// an error.
IrlsOut irls(const DesignMatrix& d, double r, Eigen::VectorXd beta0) {
  const long n = d.X.rows();
  const long p = d.X.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  const long rank = qr.rank();
  const bool deficient = rank < p;
  if (deficient) {
    std::set<std::vector<double>> classes;
    for (long i = 0; i < n; ++i) {
      std::vector<double> row(p);
      for (long j = 0; j < p; ++j) row[j] = d.X(i, j);
      classes.insert(std::move(row));
    }
    if (static_cast<long>(classes.size()) > rank) {
      std::ostringstream os;
      os << "IRLS: design is rank deficient (rank " << rank << " of " << p << " columns, "
         << classes.size() << " covariate classes); drop aliased factor levels";
      throw std::runtime_error(os.str());
    }
  }

  Eigen::VectorXd beta = std::move(beta0);
  if (beta.size() != p) {
    beta = Eigen::VectorXd::Zero(p);
    double ysum = 0.0, esum = 0.0;
    for (long i = 0; i < n; ++i) {
      ysum += d.y(i);
      esum += std::exp(d.offset(i));
    }
    beta(0) = std::log(std::max(ysum, 0.5) / esum);
  }
  Eigen::VectorXd mu(n), w(n), z(n), eta(n);
  Eigen::MatrixXd xtwx;
  const bool poisson = !std::isfinite(r);
  double dev_prev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500; ++iter) {
    eta = d.X * beta;
    for (long i = 0; i < n; ++i) {
      mu(i) = std::exp(eta(i) + d.offset(i));
      w(i) = poisson ? mu(i) : mu(i) * r / (r + mu(i));
      z(i) = eta(i) + (d.y(i) - mu(i)) / mu(i);
    }
    xtwx = d.X.transpose() * w.asDiagonal() * d.X;
    const Eigen::VectorXd xtwz = d.X.transpose() * (w.array() * z.array()).matrix();
    if (deficient) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xtwx);
      beta = cod.solve(xtwz);
    } else {
      beta = Eigen::FullPivLU<Eigen::MatrixXd>(xtwx).solve(xtwz);
    }
    eta = d.X * beta;
    for (long i = 0; i < n; ++i) mu(i) = std::exp(eta(i) + d.offset(i));
    const double dev = poisson ? poisson_deviance(d.y, mu) : nb_deviance(d.y, mu, r);
    if (std::fabs(dev - dev_prev) <= 1e-10 * (std::fabs(dev) + 1e-3)) {
      dev_prev = dev;
      break;
    }
    dev_prev = dev;
  }
  for (long i = 0; i < n; ++i)
    w(i) = poisson ? mu(i) : mu(i) * r / (r + mu(i));
  xtwx = d.X.transpose() * w.asDiagonal() * d.X;
  return {beta, mu, xtwx, dev_prev};
}

GLMFit finish_poisson(const DesignMatrix& d, const IrlsOut& o) {
  GLMFit fit;
  fit.family = "Poisson";
  fit.coef_names = d.names;
  fit.beta = o.beta;
  fit.mu = o.mu;
  fit.log_likelihood = poisson_loglik(d.y, o.mu);
  fit.deviance = o.deviance;
  fit.df = d.X.rows() - d.X.cols();
  fit.deviance_p = fit.df > 0 ? chisq_upper_tail(fit.deviance, static_cast<double>(fit.df))
                              : std::numeric_limits<double>::quiet_NaN();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(o.xtwx);
  const Eigen::MatrixXd cov = cod.pseudoInverse();
  const long p = o.beta.size();
  fit.se.resize(p);
  fit.z.resize(p);
  for (long j = 0; j < p; ++j) {
    fit.se(j) = std::sqrt(std::max(cov(j, j), 0.0));
    fit.z(j) = fit.se(j) > 0.0 ? o.beta(j) / fit.se(j) : 0.0;
  }
  return fit;
}

// Profile log-likelihood maximization over ln r by safeguarded Newton with
// finite differences and step halving.
double maximize_profile_r(const DesignMatrix& d, const Eigen::VectorXd& mu, double r0) {
  double t = std::log(r0);
  auto ell = [&](double lt) { return nb_loglik(d.y, mu, std::exp(lt)); };
  for (int it = 0; it < 60; ++it) {
    const double h = 1e-5;
    const double f0 = ell(t), fp = ell(t + h), fm = ell(t - h);
    const double g = (fp - fm) / (2.0 * h);
    const double H = (fp - 2.0 * f0 + fm) / (h * h);
    double step = (H < 0.0) ? -g / H : (g > 0 ? 0.5 : -0.5);
    if (std::fabs(step) > 2.0) step = step > 0 ? 2.0 : -2.0;
    double tn = t + step;
    int halvings = 0;
    while (ell(tn) < f0 && halvings < 40) {
      step *= 0.5;
      tn = t + step;
      ++halvings;
    }
    if (std::fabs(tn - t) < 1e-12) return std::exp(t);
    t = tn;
    if (std::fabs(g) < 1e-12) break;
    if (t > 40.0) return std::exp(40.0);  // effectively Poisson
  }
  return std::exp(t);
}

GLMFit negbin_on_design(const DesignMatrix& d) {
  const long n = d.X.rows();
  const long p = d.X.cols();
  // initialize from the Poisson fit; moment estimate of r from Pearson residuals
  IrlsOut pois = irls(d, std::numeric_limits<double>::infinity(), Eigen::VectorXd());
  double num = 0.0, den = 0.0;
  for (long i = 0; i < n; ++i) {
    const double m = pois.mu(i);
    num += m * m;
    den += (d.y(i) - m) * (d.y(i) - m) - m;
  }
  GLMFit fit;
  fit.family = "NegativeBinomial";
  fit.coef_names = d.names;
  if (den <= 0.0) {
    // no overdispersion: NB degenerates to Poisson
    fit = finish_poisson(d, pois);
    fit.family = "NegativeBinomial";
    fit.poisson_equivalent = true;
    return fit;
  }
  double r = num / den;
  Eigen::VectorXd beta = pois.beta;
  IrlsOut o;
  for (int outer = 0; outer < 200; ++outer) {
    o = irls(d, r, beta);
    const double r_new = maximize_profile_r(d, o.mu, r);
    const double rel_b = (o.beta - beta).cwiseAbs().maxCoeff() /
                         (beta.cwiseAbs().maxCoeff() + 1e-12);
    const double rel_r = std::fabs(r_new - r) / r;
    beta = o.beta;
    r = r_new;
    if (r > std::exp(39.0)) {
      fit = finish_poisson(d, o);
      fit.family = "NegativeBinomial";
      fit.poisson_equivalent = true;
      return fit;
    }
    if (rel_b < 1e-8 && rel_r < 1e-8) break;
  }
  o = irls(d, r, beta);
  beta = o.beta;

  fit.beta = beta;
  fit.mu = o.mu;
  fit.r_hat = r;
  fit.log_likelihood = nb_loglik(d.y, o.mu, r);
  fit.deviance = nb_deviance(d.y, o.mu, r);
  fit.df = n - p - 1;
  fit.deviance_p = fit.df > 0 ? chisq_upper_tail(fit.deviance, static_cast<double>(fit.df))
                              : std::numeric_limits<double>::quiet_NaN();

  // joint observed information over (beta, r)
  const long q = p + 1;
  auto nll = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd mu(n);
    const Eigen::VectorXd eta = d.X * th.head(p);
    for (long i = 0; i < n; ++i) mu(i) = std::exp(eta(i) + d.offset(i));
    return -nb_loglik(d.y, mu, th(p));
  };
  Eigen::VectorXd th(q);
  th.head(p) = beta;
  th(p) = r;
  Eigen::MatrixXd H(q, q);
  Eigen::VectorXd hstep(q);
  for (long j = 0; j < q; ++j) hstep(j) = 1e-4 * std::max(std::fabs(th(j)), 1e-3);
  const double f0 = nll(th);
  for (long i = 0; i < q; ++i) {
    Eigen::VectorXd tp = th, tm = th;
    tp(i) += hstep(i);
    tm(i) -= hstep(i);
    H(i, i) = (nll(tp) - 2.0 * f0 + nll(tm)) / (hstep(i) * hstep(i));
    for (long j = i + 1; j < q; ++j) {
      Eigen::VectorXd tpp = th, tpm = th, tmp = th, tmm = th;
      tpp(i) += hstep(i); tpp(j) += hstep(j);
      tpm(i) += hstep(i); tpm(j) -= hstep(j);
      tmp(i) -= hstep(i); tmp(j) += hstep(j);
      tmm(i) -= hstep(i); tmm(j) -= hstep(j);
      H(i, j) = H(j, i) = (nll(tpp) - nll(tpm) - nll(tmp) + nll(tmm)) /
                          (4.0 * hstep(i) * hstep(j));
    }
  }
  const Eigen::MatrixXd cov = H.inverse();
  fit.se.resize(p);
  fit.z.resize(p);
  for (long j = 0; j < p; ++j) {
    fit.se(j) = std::sqrt(cov(j, j));
    fit.z(j) = beta(j) / fit.se(j);
  }
  fit.r_se = std::sqrt(cov(p, p));
  fit.r_z = r / *fit.r_se;
  return fit;
}

}  // namespace

void validate_record(const RiskRecord& r, long line_no) {
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "record " << line_no << ": " << what;
    throw std::domain_error(os.str());
  };
  if (r.kilometres < 1 || r.kilometres > 5) fail("kilometres band out of range 1..5");
  if (r.zone < 1 || r.zone > 7) fail("zone out of range 1..7");
  if (r.bonus < 1 || r.bonus > 7) fail("bonus out of range 1..7");
  if (r.make < 1 || r.make > 9) fail("make out of range 1..9");
  if (!(r.exposure > 0.0)) fail("exposure must be > 0");
  if (r.claims < 0) fail("claims must be >= 0");
  if (r.payment < 0.0) fail("payment must be >= 0");
}

DesignMatrix encode_design(const std::vector<RiskRecord>& records) {
  return encode_subset(records, 0xFu);
}

GLMFit fit_poisson(const std::vector<RiskRecord>& records) {
  const DesignMatrix d = encode_design(records);
  IrlsOut o = irls(d, std::numeric_limits<double>::infinity(), Eigen::VectorXd());
  return finish_poisson(d, o);
}

GLMFit fit_negbin(const std::vector<RiskRecord>& records) {
  return negbin_on_design(encode_design(records));
}

MixingSample derive_mixing_sample(const GLMFit& fit, MixingSample::Kind kind) {
  MixingSample s;
  s.kind = kind;
  s.values.resize(fit.mu.size());
  if (kind == MixingSample::Kind::lambda) {
    for (long i = 0; i < fit.mu.size(); ++i) s.values[i] = fit.mu(i);
  } else {
    if (!fit.r_hat) throw std::domain_error("derive_mixing_sample: kind=p requires an NB fit");
    const double r = *fit.r_hat;
    s.r_hat = r;
    for (long i = 0; i < fit.mu.size(); ++i) s.values[i] = fit.mu(i) / (fit.mu(i) + r);
  }
  return s;
}

std::vector<SubsetResult> subset_search(const std::vector<RiskRecord>& records,
                                        const std::string& family) {
  const bool poisson = family == "Poisson";
  if (!poisson && family != "NegativeBinomial")
    throw std::domain_error("subset_search: family must be Poisson or NegativeBinomial");
  std::vector<SubsetResult> out;
  const double n = static_cast<double>(records.size());
  for (unsigned mask = 0; mask < 16; ++mask) {
    const DesignMatrix d = encode_subset(records, mask);
    double ll;
    long k;
    if (poisson) {
      IrlsOut o = irls(d, std::numeric_limits<double>::infinity(), Eigen::VectorXd());
      ll = poisson_loglik(d.y, o.mu);
      k = d.X.cols();
    } else {
      GLMFit f = negbin_on_design(d);
      ll = f.log_likelihood;
      k = d.X.cols() + (f.poisson_equivalent ? 0 : 1);
    }
    SubsetResult r;
    r.family = family;
    std::ostringstream os;
    bool any = false;
    for (int fi = 0; fi < 4; ++fi) {
      if (!(mask & (1u << fi))) continue;
      if (any) os << "+";
      os << kFactors[fi].tag;
      any = true;
    }
    r.subset = any ? os.str() : "1";
    r.aic = -2.0 * ll + 2.0 * k;
    r.bic = -2.0 * ll + k * std::log(n);
    out.push_back(r);
  }
  return out;
}

}  // namespace hgmix
