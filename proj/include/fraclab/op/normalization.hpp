#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclab/core/field.hpp"

namespace fraclab {

// c_{n,s} = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|).
inline double normalization_closed_form(const FractionalOrder& order, int dim) {
  require(dim == 1 || dim == 2, "normalization constant supports dim 1 or 2");
  const double s = order.s();
  return std::pow(4.0, s) * std::tgamma(0.5 * dim + s) /
         (std::pow(std::numbers::pi, 0.5 * dim) * std::abs(std::tgamma(-s)));
}

namespace detail {
// |S^{d-1}|: 2 in 1-D, 2 pi in 2-D.
inline double sphere_area(int dim) { return dim == 1 ? 2.0 : 2.0 * std::numbers::pi; }
}  // namespace detail

// Calibration on u = exp(-|x|^2): the constant equals (symbol side) / (kernel side) at x = 0,
// with both radial integrals evaluated by double-exponential quadrature.
inline double normalization_calibrated(const FractionalOrder& order, int dim) {
  require(dim == 1 || dim == 2, "normalization constant supports dim 1 or 2");
  const double s = order.s();
  boost::math::quadrature::tanh_sinh<double> ts;
  // int_0^inf (1 - e^{-z^2}) z^{-1-2s} dz, split at 1 and folded by z = 1/t beyond.
  const double near = ts.integrate(
      [s](double z) {
        // 1 - e^{-z^2} ~ z^2 once z^2 underflows.
        return z < 1e-100 ? std::pow(z, 1.0 - 2.0 * s)
                          : -std::expm1(-z * z) * std::pow(z, -1.0 - 2.0 * s);
      },
      0.0, 1.0);
  const double far = ts.integrate(
      [s](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-1.0 / (t * t)) * std::pow(t, 2.0 * s - 1.0); },
      0.0, 1.0);
  const double kernel_side = detail::sphere_area(dim) * (near + far);
  // (2 pi)^{-d} int |xi|^{2s} pi^{d/2} e^{-|xi|^2/4} d xi, radial integral folded to [0, 1].
  const double radial = ts.integrate(
      [s, dim](double t) {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double rho = t / (1.0 - t);
        if (rho > 100.0) return 0.0;
        const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
        return std::pow(rho, 2.0 * s + dim - 1) * std::exp(-0.25 * rho * rho) * jac;
      },
      0.0, 1.0);
  const double symbol_side = std::pow(2.0 * std::numbers::pi, -dim) *
                             std::pow(std::numbers::pi, 0.5 * dim) * detail::sphere_area(dim) *
                             radial;
  return symbol_side / kernel_side;
}

// Calibrated constant, guarded against the closed form.
inline double normalization_constant(const FractionalOrder& order, int dim = 1) {
  const double calibrated = normalization_calibrated(order, dim);
  const double closed = normalization_closed_form(order, dim);
  if (std::abs(calibrated - closed) > 1e-4 * closed)
    throw ConvergenceError("normalization calibration disagrees with the closed form");
  return calibrated;
}

}  // namespace fraclab
