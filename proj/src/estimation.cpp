#include "hgmix/estimation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace hgmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryLogParam = 12.0;

std::map<long, long> histogram(const CountSample& s) {
  std::map<long, long> h;
  for (long v : s.counts) {
    if (v < 0) throw std::domain_error("CountSample: counts must be >= 0");
    ++h[v];
  }
  return h;
}

struct FamilyTransform {
  int dim;
  // theta (unconstrained) -> natural parameters
  std::vector<double> (*to_natural)(const std::vector<double>&);
  std::vector<double> (*to_theta)(const std::vector<double>&);
};

std::vector<double> exp_all(const std::vector<double>& t) {
  std::vector<double> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) out[i] = std::exp(t[i]);
  return out;
}
std::vector<double> log_all(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::log(v[i]);
  return out;
}
std::vector<double> zeta_nat(const std::vector<double>& t) { return {1.0 + std::exp(t[0])}; }
std::vector<double> zeta_theta(const std::vector<double>& v) { return {std::log(v[0] - 1.0)}; }
std::vector<double> nb_nat(const std::vector<double>& t) {
  return {std::exp(t[0]), 1.0 / (1.0 + std::exp(-t[1]))};
}
std::vector<double> nb_theta(const std::vector<double>& v) {
  return {std::log(v[0]), std::log(v[1] / (1.0 - v[1]))};
}
std::vector<double> geom_nat(const std::vector<double>& t) {
  return {1.0 / (1.0 + std::exp(-t[0]))};
}
std::vector<double> geom_theta(const std::vector<double>& v) {
  return {std::log(v[0] / (1.0 - v[0]))};
}

FamilyTransform transform_for(const std::string& family) {
  if (family == "Zeta") return {1, zeta_nat, zeta_theta};
  if (family == "NegativeBinomial") return {2, nb_nat, nb_theta};
  if (family == "Geometric") return {1, geom_nat, geom_theta};
  int dim = 0;
  if (family == "Poisson" || family == "Yule") dim = 1;
  else if (family == "Waring" || family == "ZY") dim = 2;
  else if (family == "GeneralizedWaring" || family == "GZY" || family == "GW2") dim = 3;
  else if (family == "HGZY") dim = 4;
  else throw std::domain_error("mle_fit: unknown family " + family);
  return {dim, exp_all, log_all};
}

double neg_loglik(const std::string& family, const std::vector<double>& natural,
                  const std::map<long, long>& hist) {
  CountModel m = make_count_model(family, natural);
  PmfEvaluator ev(m);
  double ll = 0.0;
  for (const auto& [x, cnt] : hist) ll += cnt * ev.log_pmf(x);
  return -ll;
}

// Method-of-moments-flavored center for the start grid; the multi-parameter
// extensions are seeded from the fit of the subfamily they generalize.
std::vector<double> default_center(const std::string& family, const CountSample& sample,
                                   const std::map<long, long>& hist);

FitResult fit_impl(const std::string& family, const CountSample& sample,
                   const FitOptions& options) {
  const auto hist = histogram(sample);
  const FamilyTransform tf = transform_for(family);
  const size_t n = sample.n();

  Objective obj = [&](const std::vector<double>& theta) {
    return neg_loglik(family, tf.to_natural(theta), hist);
  };

  std::vector<std::vector<double>> starts;
  if (!options.starts.empty()) {
    for (const auto& s : options.starts) starts.push_back(tf.to_theta(s));
  } else {
    const std::vector<double> c = default_center(family, sample, hist);
    starts.push_back(c);
    for (int k = 0; k < 4; ++k) {
      std::vector<double> s = c;
      s[k % tf.dim] += (k % 2 == 0) ? 1.0 : -1.0;
      starts.push_back(s);
    }
  }

  SimplexOptions so;
  so.max_iter = options.max_iter;
  so.f_tol = options.tol;
  SimplexResult best = multi_start_nelder_mead(obj, starts, so);

  // Restart from the incumbent until it stops moving. A genuine interior
  // maximum stabilizes; a likelihood ridge running to the parameter-space
  // boundary keeps drifting with vanishing gains and is reported as
  // non-convergent rather than as an estimate.
  bool drifting = false;
  for (int round = 0; round < 6; ++round) {
    SimplexResult next = nelder_mead(obj, best.x, so);
    double move = 0.0;
    for (size_t i = 0; i < next.x.size(); ++i)
      move = std::max(move, std::fabs(next.x[i] - best.x[i]));
    const double gain = best.fmin - next.fmin;
    next.max_abs_x = std::max(next.max_abs_x, best.max_abs_x);
    if (next.fmin < best.fmin) best = next;
    if (move < 0.05) {
      drifting = false;
      break;
    }
    drifting = gain < 0.05;
  }

  // Ridge probe: if the log-likelihood is flat along the softest Hessian
  // direction over several log-units, the supremum sits on the parameter
  // boundary (the GW2 signature), not at an interior point.
  bool flat_ridge = false;
  if (tf.dim > 1 && std::isfinite(best.fmin)) {
    const auto H = fd_hessian([&](const std::vector<double>& th) {
      try {
        return neg_loglik(family, tf.to_natural(th), hist);
      } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
      }
    }, best.x, 5e-3);
    Eigen::MatrixXd Hm(tf.dim, tf.dim);
    for (int i = 0; i < tf.dim; ++i)
      for (int j = 0; j < tf.dim; ++j) Hm(i, j) = H[i][j];
    if (Hm.allFinite()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm);
      Eigen::VectorXd v = es.eigenvectors().col(0);  // smallest eigenvalue
      double max_gain = 0.0;
      for (double s : {-4.0, -2.0, 2.0, 4.0}) {
        std::vector<double> probe(best.x);
        for (int i = 0; i < tf.dim; ++i) probe[i] += s * v(i);
        double fv;
        try {
          fv = neg_loglik(family, tf.to_natural(probe), hist);
        } catch (const std::exception&) {
          continue;
        }
        max_gain = std::max(max_gain, best.fmin - fv + 0.0);
        if (std::fabs(fv - best.fmin) < 0.02) flat_ridge = true;
      }
      if (max_gain > 0.02) flat_ridge = true;  // probe found a better point far away
    }
  }

  FitResult fit;
  fit.family = family;
  fit.estimates = tf.to_natural(best.x);
  fit.log_likelihood = -best.fmin;
  const int k = tf.dim;
  fit.aic = 2.0 * best.fmin + 2.0 * k;
  fit.bic = 2.0 * best.fmin + k * std::log(static_cast<double>(n));

  bool at_boundary = false;
  for (double t : best.x) at_boundary |= std::fabs(t) > kBoundaryLogParam;
  fit.boundary_flag = at_boundary || drifting || flat_ridge || best.max_abs_x > 30.0;
  fit.converged =
      best.converged && !at_boundary && !drifting && !flat_ridge && std::isfinite(best.fmin);
  if (at_boundary || drifting || flat_ridge) {
    fit.converged = false;
    fit.message = "no interior maximum (likelihood flat or increasing toward the boundary)";
  } else if (!best.converged) {
    fit.message = "optimizer iteration limit reached";
  }

  if (fit.converged && options.compute_std_errors) {
    try {
      fit.std_errors = std_errors(fit, sample);
    } catch (const std::exception& e) {
      fit.std_errors.clear();
      fit.message = e.what();
    }
  }
  return fit;
}

std::vector<double> default_center(const std::string& family, const CountSample& sample,
                                   const std::map<long, long>& hist) {
  const double n = static_cast<double>(sample.n());
  double mean = 0.0;
  for (const auto& [x, cnt] : hist) mean += static_cast<double>(x) * cnt;
  mean /= n;
  double var = 0.0;
  for (const auto& [x, cnt] : hist) var += (x - mean) * (x - mean) * cnt;
  var /= std::max(n - 1.0, 1.0);

  auto cheap_fit = [&](const std::string& fam) {
    FitOptions o;
    o.compute_std_errors = false;
    o.max_iter = 2000;
    o.tol = 1e-9;
    return fit_impl(fam, sample, o);
  };

  if (family == "Poisson") return {std::log(std::max(mean, 1e-12))};
  if (family == "Geometric") {
    const double p = std::clamp(mean / (1.0 + mean), 1e-6, 1.0 - 1e-6);
    return {std::log(p / (1.0 - p))};
  }
  if (family == "NegativeBinomial") {
    const double r = var > mean ? mean * mean / (var - mean) : 1.0;
    const double p = std::clamp(mean / (mean + r), 1e-6, 1.0 - 1e-6);
    return {std::log(r), std::log(p / (1.0 - p))};
  }
  if (family == "Zeta") return {std::log(0.5)};  // s = 1.5
  if (family == "Yule") {
    const long zeros = hist.count(0) ? hist.at(0) : 0;
    const double f0 = std::clamp(zeros / n, 0.05, 0.95);
    return {std::log(f0 / (1.0 - f0))};
  }
  if (family == "Waring") {
    const double b = std::exp(default_center("Yule", sample, hist)[0]);
    return {0.0, std::log(b)};
  }
  if (family == "GeneralizedWaring") {
    const double b = std::exp(default_center("Yule", sample, hist)[0]);
    return {0.0, 0.0, std::log(b)};
  }
  if (family == "ZY") {
    const FitResult yule = cheap_fit("Yule");
    return {std::log(yule.estimates[0]), 0.0};
  }
  if (family == "GW2") {
    const FitResult waring = cheap_fit("Waring");
    return {std::log(waring.estimates[0]), std::log(waring.estimates[1]), 0.0};
  }
  if (family == "GZY") {
    const FitResult zy = cheap_fit("ZY");
    return {-std::log(zy.estimates[1]), std::log(zy.estimates[0]), std::log(zy.estimates[1])};
  }
  if (family == "HGZY") {
    // The 4D surface has a long curved valley in (c,d); profile over a
    // deterministic d ladder, walking each 3D fit from its neighbor's
    // optimum, and center the start grid on the best rung.
    const FitResult gzy = cheap_fit("GZY");
    std::vector<double> abc = {std::log(gzy.estimates[0]), std::log(gzy.estimates[1]),
                               std::log(gzy.estimates[2])};
    SimplexOptions so;
    so.max_iter = 1200;
    so.f_tol = 1e-8;
    std::vector<double> best4;
    double best_nll = std::numeric_limits<double>::infinity();
    for (double ld = 0.0; ld <= std::log(256.0) + 1e-9; ld += std::log(2.0)) {
      Objective obj3 = [&](const std::vector<double>& t3) {
        return neg_loglik("HGZY",
                          {std::exp(t3[0]), std::exp(t3[1]), std::exp(t3[2]), std::exp(ld)},
                          hist);
      };
      SimplexResult r = nelder_mead(obj3, abc, so);
      if (std::isfinite(r.fmin)) {
        abc = r.x;
        if (r.fmin < best_nll) {
          best_nll = r.fmin;
          best4 = {r.x[0], r.x[1], r.x[2], ld};
        }
      }
    }
    if (best4.empty()) best4 = {abc[0], abc[1], abc[2], 0.0};
    return best4;
  }
  throw std::domain_error("default_center: unknown family " + family);
}

}  // namespace

SummaryStats summary_stats(const std::vector<double>& values) {
  const size_t n = values.size();
  if (n < 2) throw std::domain_error("summary_stats: need at least 2 observations");
  SummaryStats s;
  s.n = n;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  long double sum = 0.0L;
  for (double v : values) sum += v;
  s.mean = static_cast<double>(sum / n);
  long double m2l = 0.0L, m3l = 0.0L, m4l = 0.0L;
  for (double v : values) {
    const long double d = v - s.mean;
    m2l += d * d;
    m3l += d * d * d;
    m4l += d * d * d * d;
  }
  const double nd = static_cast<double>(n);
  s.sd = std::sqrt(static_cast<double>(m2l) / (nd - 1.0));
  const double m2 = static_cast<double>(m2l / n);
  const double m3 = static_cast<double>(m3l / n);
  const double m4 = static_cast<double>(m4l / n);
  if (m2 <= 0.0) {
    s.higher_moments_defined = false;
    s.skewness = s.kurtosis = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2);
  if (n < 4) {
    s.higher_moments_defined = false;
    s.skewness = s.kurtosis = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.skewness = g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
  const double G2_excess = ((nd + 1.0) * (g2 - 3.0) + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
  s.kurtosis = G2_excess + 3.0;
  return s;
}

FitResult mle_fit(const std::string& family, const CountSample& sample,
                  const FitOptions& options) {
  if (sample.n() == 0) throw std::domain_error("mle_fit: empty sample");
  return fit_impl(family, sample, options);
}

std::vector<double> std_errors(const FitResult& fit, const CountSample& sample) {
  if (!fit.converged && fit.std_errors.empty() && fit.estimates.empty())
    throw std::domain_error("std_errors: fit did not converge");
  const auto hist = histogram(sample);
  Objective nll = [&](const std::vector<double>& nat) {
    return neg_loglik(fit.family, nat, hist);
  };
  const auto H = fd_hessian(nll, fit.estimates, 1e-4);
  const int k = static_cast<int>(fit.estimates.size());
  Eigen::MatrixXd Hm(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) Hm(i, j) = H[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "std_errors: observed information not positive definite; eigenvalues:";
    for (int i = 0; i < k; ++i) os << " " << es.eigenvalues()(i);
    throw std::runtime_error(os.str());
  }
  Eigen::MatrixXd inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  std::vector<double> se(k);
  for (int i = 0; i < k; ++i) se[i] = std::sqrt(inv(i, i));
  return se;
}

GofReport chisq_gof(const CountModel& fitted, const CountSample& sample, GofMode mode) {
  const auto hist = histogram(sample);
  const double n = static_cast<double>(sample.n());
  const int n_params = parameter_count(fitted);

  auto layout_size = [&](const CountModel& m) -> long {
    PmfEvaluator ev(m);
    long K = 0;
    while (K < 100000) {
      if (n * std::exp(ev.log_pmf(K)) < 10.0) break;
      ++K;
    }
    return K;
  };

  auto build = [&](const CountModel& m, long K) -> GofReport {
    PmfEvaluator ev(m);
    GofReport rep;
    double head_mass = 0.0;
    for (long x = 0; x < K; ++x) {
      GofCell cell;
      cell.x_lo = x;
      const double f = std::exp(ev.log_pmf(x));
      cell.expected = n * f;
      head_mass += f;
      auto it = hist.find(x);
      cell.observed = it == hist.end() ? 0.0 : static_cast<double>(it->second);
      rep.cells.push_back(cell);
    }
    GofCell tail;
    tail.x_lo = K;
    tail.catch_all = true;
    tail.expected = n * (1.0 - head_mass);
    double obs_tail = 0.0;
    for (const auto& [x, cnt] : hist)
      if (x >= K) obs_tail += cnt;
    tail.observed = obs_tail;
    rep.cells.push_back(tail);
    rep.statistic = 0.0;
    for (const auto& c : rep.cells)
      rep.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
    rep.df = static_cast<int>(rep.cells.size()) - n_params - 1;
    rep.p_value = rep.df > 0 ? chisq_upper_tail(rep.statistic, rep.df) : 0.0;
    return rep;
  };

  const long K = layout_size(fitted);
  if (K + 1 < n_params + 2) throw std::domain_error("chisq_gof: too few cells for the test");

  if (mode == GofMode::at_mle) return build(fitted, K);

  // minimized mode: re-optimize the parameters against the statistic with the
  // cell layout frozen at the MLE layout
  const std::string fam = family_name(fitted);
  const std::vector<double> start = parameters(fitted);
  Objective stat_obj = [&](const std::vector<double>& theta) {
    std::vector<double> nat(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) nat[i] = std::exp(theta[i]);
    if (fam == "Zeta") nat[0] = 1.0 + nat[0];
    return build(make_count_model(fam, nat), K).statistic;
  };
  std::vector<double> theta0(start.size());
  for (size_t i = 0; i < start.size(); ++i)
    theta0[i] = std::log(fam == "Zeta" && i == 0 ? start[i] - 1.0 : start[i]);
  SimplexOptions so;
  so.max_iter = 2000;
  so.f_tol = 1e-9;
  SimplexResult res = nelder_mead(stat_obj, theta0, so);
  std::vector<double> nat(res.x.size());
  for (size_t i = 0; i < res.x.size(); ++i) nat[i] = std::exp(res.x[i]);
  if (fam == "Zeta") nat[0] = 1.0 + nat[0];
  return build(make_count_model(fam, nat), K);
}

const std::vector<std::string>& hg_family_names() {
  static const std::vector<std::string> names = {"HGZY", "GZY", "GW2", "ZY",
                                                 "Waring", "Zeta", "Yule"};
  return names;
}

std::vector<FamilyAssessment> fit_all_hg(const CountSample& sample) {
  std::vector<FamilyAssessment> out;
  for (const std::string& fam : hg_family_names()) {
    FamilyAssessment fa;
    fa.fit = mle_fit(fam, sample);
    if (fa.fit.converged) {
      try {
        fa.gof = chisq_gof(make_count_model(fam, fa.fit.estimates), sample);
        fa.rejected_at_05 = fa.gof->p_value < 0.05;
      } catch (const std::exception& e) {
        fa.fit.message = e.what();
      }
    }
    if (fa.fit.converged && !fa.rejected_at_05) {
      fa.aic = fa.fit.aic;
      fa.bic = fa.fit.bic;
    }
    out.push_back(std::move(fa));
  }
  return out;
}

std::vector<long> sample_counts(const CountModel& m, size_t n, unsigned long seed) {
  PmfEvaluator ev(m);
  std::vector<double> cdf;  // cdf[x] = P(X <= x), grown on demand
  double acc = 0.0;
  auto extend = [&]() {
    const size_t target = cdf.empty() ? 64 : cdf.size() * 2;
    while (cdf.size() < target && acc < 1.0 - 1e-14) {
      acc += std::exp(ev.log_pmf(static_cast<long>(cdf.size())));
      cdf.push_back(std::min(acc, 1.0));
    }
  };
  extend();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<long> draws(n);
  for (size_t i = 0; i < n; ++i) {
    const double u = unif(rng);
    while (cdf.back() < u && acc < 1.0 - 1e-14) extend();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    draws[i] = it == cdf.end() ? static_cast<long>(cdf.size()) - 1
                               : static_cast<long>(it - cdf.begin());
  }
  return draws;
}

}  // namespace hgmix
