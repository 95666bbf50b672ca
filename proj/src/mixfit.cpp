#include "hgmix/mixfit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "hgmix/quadrature.hpp"

namespace hgmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(size_t n, const std::function<void(size_t)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || n < 8) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < hw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

MixingModel mixing_for(const std::string& family, const std::vector<double>& v) {
  if (family == "Waring") {
    if (v.size() != 2) throw std::domain_error("Waring mixing: expected 2 parameters");
    return BetaMix(v[0], v[1]);
  }
  if (family == "GZY") {
    if (v.size() != 3) throw std::domain_error("GZY mixing: expected 3 parameters");
    return GSigmaB(v[0], v[1], v[2]);
  }
  if (family == "HGZY") {
    if (v.size() != 4) throw std::domain_error("HGZY mixing: expected 4 parameters");
    return HGSigmaB(v[0], v[1], v[2], v[3]);
  }
  throw std::domain_error("mixing family must be Waring, GZY or HGZY: " + family);
}

// Monotone cubic (Fritsch-Carlson) interpolant on a sorted grid.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d * d0 <= 0.0) d = 0.0;
      else if (d0 * d1 <= 0.0 && std::fabs(d) > 3.0 * std::fabs(d0)) d = 3.0 * d0;
      return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double x) const {
    const size_t n = x_.size();
    if (x <= x_[0]) return y_[0] + d_[0] * (x - x_[0]);
    if (x >= x_[n - 1]) return y_[n - 1] + d_[n - 1] * (x - x_[n - 1]);
    size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y_[i] * (2 * t3 - 3 * t2 + 1) + h * d_[i] * (t3 - 2 * t2 + t) +
           y_[i + 1] * (-2 * t3 + 3 * t2) + h * d_[i + 1] * (t3 - t2);
  }

 private:
  std::vector<double> x_, y_, d_;
};

struct DensityContext {
  std::string family;
  MixingSample::Kind kind;
  double r = 0.0;  // kind = p only
};

double point_log_density(const DensityContext& ctx, const std::vector<double>& params,
                         double v) {
  if (ctx.kind == MixingSample::Kind::lambda)
    return lambda_log_density(ctx.family, params, v);
  return p_log_density_at_r(ctx.family, params, ctx.r, v);
}

std::vector<double> log_grid(double lo, double hi, int knots) {
  std::vector<double> g(knots);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < knots; ++i)
    g[i] = llo + (lhi - llo) * i / (knots - 1.0);
  return g;
}

}  // namespace

double lambda_log_density(const std::string& family, const std::vector<double>& params,
                          double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda_density: lambda must be > 0");
  if (family == "Waring") {
    // f(l) = 1/B(a,b) Int_0^inf y^b (y+1)^-(a+b) e^(-l y) dy, in s = ln y
    const double a = params.at(0), b = params.at(1);
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("Waring mixing: a,b > 0");
    auto E = [&](double s) {
      const double y = std::exp(s);
      return (b + 1.0) * s - (a + b) * (s > 30.0 ? s : std::log1p(y)) - lambda * y;
    };
    const double s0 = std::clamp(-std::log(lambda), -45.0, 45.0);
    double smax = s0, emax = -kInf;
    for (double s = s0 - 26.0; s <= s0 + 26.0; s += 0.5) {
      const double v = E(s);
      if (v > emax) { emax = v; smax = s; }
    }
    double lo = smax, hi = smax;
    while (lo > -746.0 && E(lo) > emax - 46.0) lo -= 1.0;
    while (hi < 746.0 && E(hi) > emax - 46.0) hi += 1.0;
    QuadratureSpec spec(1e-14, 1e-10, 4000);
    const double I = integrate([&](double s) {
      const double v = E(s) - emax;
      return v < -745.0 ? 0.0 : std::exp(v);
    }, lo, hi, spec);
    return emax + std::log(I) - log_beta(a, b);
  }
  const BaseDensity base = make_base_density(mixing_for(family, params));
  return poisson_mix_log_density(base, lambda);
}

double lambda_density(const std::string& family, const std::vector<double>& params,
                      double lambda) {
  return std::exp(lambda_log_density(family, params, lambda));
}

double p_log_density_at_r(const std::string& family, const std::vector<double>& params,
                          double r, double p) {
  if (!(r > 1.0))
    throw std::domain_error("p_density_at_r: requires r > 1");
  const BaseDensity base = make_base_density(mixing_for(family, params));
  return calibrate_up_log(base, r, p);
}

double p_density_at_r(const std::string& family, const std::vector<double>& params, double r,
                      double p) {
  return std::exp(p_log_density_at_r(family, params, r, p));
}

FitResult fit_mixing(const MixingSample& sample, const MixingTarget& target) {
  if (sample.values.empty()) throw std::domain_error("fit_mixing: empty sample");
  DensityContext ctx;
  ctx.family = target.family;
  ctx.kind = target.kind;
  if (target.kind == MixingSample::Kind::p) {
    if (target.r_hat) ctx.r = *target.r_hat;
    else if (sample.r_hat) ctx.r = *sample.r_hat;
    else throw std::domain_error("fit_mixing: kind=p requires r_hat");
    if (!(ctx.r > 1.0)) throw std::domain_error("fit_mixing: r_hat must be > 1");
  }
  double vmin = kInf, vmax = -kInf;
  for (double v : sample.values) {
    if (target.kind == MixingSample::Kind::lambda && !(v > 0.0))
      throw std::domain_error("fit_mixing: lambda values must be > 0");
    if (target.kind == MixingSample::Kind::p && !(v > 0.0 && v < 1.0))
      throw std::domain_error("fit_mixing: p values must be in (0,1)");
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  std::vector<double> log_values(sample.values.size());
  for (size_t i = 0; i < sample.values.size(); ++i) log_values[i] = std::log(sample.values[i]);

  const int dim = target.family == "Waring" ? 2 : (target.family == "GZY" ? 3 : 4);

  const double grid_lo = vmin * 0.999;
  const double grid_hi = target.kind == MixingSample::Kind::p
                             ? std::min(vmax * 1.001, 0.5 * (1.0 + vmax))
                             : vmax * 1.001;
  int knots = 200;
  auto negll_at = [&](const std::vector<double>& theta, int k) -> double {
    std::vector<double> params(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) params[i] = std::exp(theta[i]);
    const std::vector<double> grid = log_grid(grid_lo, grid_hi, k);
    std::vector<double> ld(grid.size());
    std::atomic<bool> bad{false};
    parallel_for(grid.size(), [&](size_t i) {
      try {
        const double v = point_log_density(ctx, params, std::exp(grid[i]));
        ld[i] = v;
        if (!std::isfinite(v)) bad = true;
      } catch (const std::exception&) {
        bad = true;
        ld[i] = -kInf;
      }
    });
    if (bad) return kInf;
    Pchip itp(grid, ld);
    double ll = 0.0;
    for (double lv : log_values) ll += itp(lv);
    return -ll;
  };

  // seed: each family starts from the fit of the subfamily it generalizes
  std::vector<double> center;
  if (target.family == "Waring") {
    center = {0.0, 0.0};
  } else if (target.family == "GZY") {
    MixingTarget t2 = target;
    t2.family = "Waring";
    FitResult w = fit_mixing(sample, t2);
    center = {std::log(w.estimates[0]), std::log(w.estimates[1]), 0.0};
  } else {
    MixingTarget t2 = target;
    t2.family = "GZY";
    FitResult g = fit_mixing(sample, t2);
    center = {std::log(g.estimates[0]), std::log(g.estimates[1]), std::log(g.estimates[2]), 0.0};
  }

  // refine the grid until the interpolated loglik is stable at the seed
  while (knots < 1600) {
    const double c1 = negll_at(center, knots);
    const double c2 = negll_at(center, knots * 2);
    if (std::isfinite(c1) && std::isfinite(c2) && std::fabs(c1 - c2) < 1e-4) break;
    knots *= 2;
  }

  Objective obj = [&](const std::vector<double>& theta) { return negll_at(theta, knots); };
  std::vector<std::vector<double>> starts;
  starts.push_back(center);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> s = center;
    s[k % dim] += (k % 2 == 0) ? 1.0 : -1.0;
    starts.push_back(s);
  }
  SimplexOptions so;
  so.max_iter = 2500;
  so.f_tol = 1e-9;
  SimplexResult best = multi_start_nelder_mead(obj, starts, so);

  FitResult fit;
  fit.family = target.family;
  fit.estimates.resize(dim);
  for (int i = 0; i < dim; ++i) fit.estimates[i] = std::exp(best.x[i]);
  fit.log_likelihood = -best.fmin;
  fit.converged = best.converged && std::isfinite(best.fmin);
  fit.boundary_flag = best.max_abs_x > 30.0;
  const double n = static_cast<double>(sample.values.size());
  fit.aic = 2.0 * best.fmin + 2.0 * dim;
  fit.bic = 2.0 * best.fmin + dim * std::log(n);

  if (fit.converged) {
    // observed information on the interpolated loglik, natural parameters
    Objective nat_nll = [&](const std::vector<double>& nat) {
      std::vector<double> theta(nat.size());
      for (size_t i = 0; i < nat.size(); ++i) theta[i] = std::log(nat[i]);
      return negll_at(theta, knots);
    };
    try {
      const auto H = fd_hessian(nat_nll, fit.estimates, 1e-3);
      Eigen::MatrixXd Hm(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) Hm(i, j) = H[i][j];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm);
      if (es.eigenvalues().minCoeff() > 0.0) {
        Eigen::MatrixXd inv = es.eigenvectors() *
                              es.eigenvalues().cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
        fit.std_errors.resize(dim);
        for (int i = 0; i < dim; ++i) fit.std_errors[i] = std::sqrt(inv(i, i));
      } else {
        fit.message = "observed information not positive definite";
      }
    } catch (const std::exception& e) {
      fit.message = e.what();
    }
  }
  return fit;
}

GofReport interval_chisq(const MixingSample& sample, const MixingTarget& target,
                         const FitResult& fit) {
  DensityContext ctx;
  ctx.family = target.family;
  ctx.kind = target.kind;
  if (target.kind == MixingSample::Kind::p) {
    ctx.r = target.r_hat ? *target.r_hat : (sample.r_hat ? *sample.r_hat : 0.0);
    if (!(ctx.r > 1.0)) throw std::domain_error("interval_chisq: kind=p requires r_hat > 1");
  }
  const double n = static_cast<double>(sample.values.size());
  const int n_params = static_cast<int>(fit.estimates.size());

  auto cell_bounds = [&](long idx) -> std::pair<double, double> {
    const double nd = static_cast<double>(idx);
    if (target.kind == MixingSample::Kind::lambda) return {nd, nd + 1.0};
    return {nd / (nd + ctx.r), (nd + 1.0) / (nd + 1.0 + ctx.r)};
  };
  QuadratureSpec spec(1e-12, 1e-9, 4000);
  auto cell_mass = [&](long idx) -> double {
    const auto [lo, hi] = cell_bounds(idx);
    return integrate([&](double v) {
      if (v <= lo || v <= 0.0) return 0.0;
      return std::exp(point_log_density(ctx, fit.estimates, v));
    }, lo, hi, spec);
  };

  GofReport rep;
  double head_mass = 0.0;
  long idx = 0;
  std::vector<double> masses;
  while (idx < 10000) {
    const double mass = cell_mass(idx);
    if (n * mass < 10.0) break;
    masses.push_back(mass);
    head_mass += mass;
    ++idx;
  }
  const long K = idx;
  if (K + 1 < n_params + 2)
    throw std::domain_error("interval_chisq: too few cells for the test");

  std::vector<double> obs(K + 1, 0.0);
  for (double v : sample.values) {
    long cell = K;  // catch-all by default
    if (target.kind == MixingSample::Kind::lambda) {
      // lambda cell (n, n+1]
      const double c = std::ceil(v) - 1.0;
      if (c < K) cell = std::max<long>(0, static_cast<long>(c));
    } else {
      // p cell (n/(n+r), (n+1)/(n+1+r)]: boundary below v means index >= that n
      const double t = ctx.r * v / (1.0 - v);  // v = t/(t+r) with t real
      long c = static_cast<long>(std::ceil(t)) - 1;
      if (c < 0) c = 0;
      // guard against boundary rounding
      while (c > 0 && v <= cell_bounds(c - 1).second) --c;
      while (v > cell_bounds(c).second) ++c;
      if (c < K) cell = c;
    }
    obs[cell] += 1.0;
  }

  for (long i = 0; i <= K; ++i) {
    GofCell cell;
    cell.x_lo = i;
    cell.catch_all = (i == K);
    cell.expected = (i == K) ? n * (1.0 - head_mass) : n * masses[i];
    cell.observed = obs[i];
    rep.cells.push_back(cell);
  }
  rep.statistic = 0.0;
  for (const auto& c : rep.cells)
    rep.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
  rep.df = static_cast<int>(rep.cells.size()) - n_params - 1;
  rep.p_value = rep.df > 0 ? chisq_upper_tail(rep.statistic, rep.df) : 0.0;
  return rep;
}

}  // namespace hgmix
