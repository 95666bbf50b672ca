#pragma once

#include <functional>

#include "hgmix/special.hpp"

namespace hgmix {

enum class EndpointSingularity { none, left_power, right_power };

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  EndpointSingularity singularity = EndpointSingularity::none;
  double exponent = 0.0;  // power of the singular endpoint factor, must be > -1

  QuadratureSpec() = default;
  QuadratureSpec(double abs_tol_, double rel_tol_, int max_sub = 4000,
                 EndpointSingularity sing = EndpointSingularity::none, double exp_ = 0.0);
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod 7-15 on a finite interval.
double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec = {});

// Integral over (0,1). Declared endpoint power singularities are removed by
// the substitution t = s^(1/(1+exponent)) before the adaptive rule runs.
double integrate_unit(const Integrand& f, const QuadratureSpec& spec = {});

// Integral over (0,inf) for integrands with decay; maps through y = t/(1-t).
double integrate_halfline(const Integrand& f, const QuadratureSpec& spec = {});

}  // namespace hgmix
