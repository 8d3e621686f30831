#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraclab/core/quadrature.hpp"
#include "fraclab/extension/half_space.hpp"
#include "fraclab/obstacle/solve.hpp"

namespace fraclab {

namespace detail {
// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k], sy += y[k], sxx += x[k] * x[k], sxy += x[k] * y[k];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}
}  // namespace detail

struct RellichReport {
  double lhs = 0.0;       // r int_{dB_r} (|v_tau|^2 - |v_nu|^2) |y|^a
  double rhs = 0.0;       // a int_{B_r} |grad v|^2 |y|^a - 2 int_{B_r} (x, y).grad v L_a v
  double residual = 0.0;  // |lhs - rhs| / (|lhs| + |rhs| + eps)
};

struct RellichOptions {
  int angular_panels = 8;  // per quarter circle
  int radial_panels = 4;
  int trace_panels = 16;   // per half of [-r, r]
  double eps = 1e-14;
};

// Both sides of the Rellich-type identity on B_r for v even in y (n = 1, so n + a - 1 = a).
// L_a v is the measure 2 flux(x) dx on the trace, hence the last term becomes
// -4 int_{-r}^{r} x v_x(x, 0) flux(x) dx.
inline RellichReport rellich_residual(const ExtensionField& v, double r,
                                      const RellichOptions& opt = {}) {
  require_radius_within(r, v.radius_limit());
  require(v.has_gradient() && v.has_flux() && v.has_slope(),
          "Rellich identity needs the model gradient, trace flux and trace slope");
  const double a = v.order().a();
  const HalfCircleRule rule(a, opt.angular_panels);
  RellichReport rep;
  rep.lhs = r * weighted_surface_integral(rule, r, [&](double x, double y) {
    const auto g = v.gradient(x, y);
    const double rho = std::hypot(x, y);
    const double nu = (g[0] * x + g[1] * y) / rho;
    const double tau = (-g[0] * y + g[1] * x) / rho;
    return tau * tau - nu * nu;
  });
  const double energy = weighted_ball_integral(rule, r, [&](double x, double y) {
    const auto g = v.gradient(x, y);
    return g[0] * g[0] + g[1] * g[1];
  }, opt.radial_panels);
  const QuadratureRule left = composite_gauss(-r, 0.0, opt.trace_panels);
  const QuadratureRule right = composite_gauss(0.0, r, opt.trace_panels);
  auto trace_term = [&](double x) { return x * v.trace_slope(x) * v.flux(x); };
  const double trace = left.integrate(trace_term) + right.integrate(trace_term);
  rep.rhs = a * energy - 4.0 * trace;
  rep.residual = std::abs(rep.lhs - rep.rhs) / (std::abs(rep.lhs) + std::abs(rep.rhs) + opt.eps);
  return rep;
}

struct BoundaryMeanReport {
  std::vector<double> radii;
  std::vector<double> mean;  // m(r) = int_{dB_r} v |y|^a / (omega r^{1+a})
  double omega = 0.0;        // int_{dB_1} |y|^a by the same rule
  double slope = 0.0;        // of log(max(m, 0) + floor) against log r
  double band = 0.0;         // pass threshold 2s + alpha - 0.3
  bool below_floor = false;  // m(r) <= floor on every radius
  bool passed = false;
};

// Growth of the weighted spherical mean of v. Passes if the fitted log-log slope reaches
// 2s + alpha - 0.3 or the mean never rises above `floor`.
inline BoundaryMeanReport boundary_mean_check(const ExtensionField& v,
                                              const std::vector<double>& radii,
                                              const FractionalOrder& order, double alpha,
                                              double floor = 1e-10, int panels_per_quarter = 8) {
  require(radii.size() >= 2, "boundary mean fit needs at least two radii");
  const double a = order.a();
  const HalfCircleRule rule(a, panels_per_quarter);
  BoundaryMeanReport rep;
  rep.radii = radii;
  rep.omega = weighted_sphere_measure(rule);
  rep.band = 2.0 * order.s() + alpha - 0.3;
  std::vector<double> lr, lm;
  rep.below_floor = true;
  for (double r : radii) {
    require_radius_within(r, v.radius_limit());
    const double m = weighted_surface_integral(rule, r, [&](double x, double y) {
                       return v.value(x, y);
                     }) / (rep.omega * std::pow(r, 1.0 + a));
    rep.mean.push_back(m);
    if (m > floor) rep.below_floor = false;
    lr.push_back(std::log(r));
    lm.push_back(std::log(std::max(m, 0.0) + floor));
  }
  rep.slope = detail::ls_slope(lr, lm);
  rep.passed = rep.below_floor || rep.slope >= rep.band;
  return rep;
}

// Radii k h for the listed cell counts. The free boundary sits somewhere in the cell next to
// the base node, so a radius of k cells carries a relative offset of up to 1/k; starting at
// k = 6 keeps that bias on the log slope below the fit tolerances.
inline std::vector<double> cell_radii(double h, std::vector<int> cells = {6, 8, 10, 12, 16, 20, 24}) {
  require(h > 0.0, "grid spacing must be positive");
  std::vector<double> r;
  for (int k : cells) r.push_back(k * h);
  return r;
}

struct GrowthFit {
  double exponent = 0.0;  // fitted kappa
  std::vector<double> radii;
  std::vector<double> sup_gap;
  double window_limit = 0.0;  // radii were kept strictly below this
};

// Slope of log sup_{|x - x0| <= r} gap against log r. Radii reaching past the contact set on
// the far side (into another free region) are dropped, and so are radii whose sup is below
// the noise floor; fewer than 6 survivors is an error.
inline GrowthFit growth_exponent_fit(const ScalarField& gap, int base, std::vector<double> radii,
                                     double noise_floor = 1e-10) {
  const GridSpec& g = gap.grid();
  const int n = g.nodes_per_axis();
  require(base >= 0 && base < n, "base point must be a grid node");
  require(std::abs(gap[base]) <= noise_floor, "gap does not vanish at the base point");
  const double h = g.spacing();
  const bool right_free = base + 1 < n && gap[base + 1] > noise_floor;
  const bool left_free = base > 0 && gap[base - 1] > noise_floor;
  // Distance to the first node past the zero run on the contact side.
  double limit = g.half_width() * 2.0;
  if (right_free != left_free) {
    const int dir = right_free ? -1 : 1;
    for (int i = base + dir; i >= 0 && i < n; i += dir)
      if (gap[i] > noise_floor) {
        limit = std::abs(i - base) * h;
        break;
      }
  }
  GrowthFit fit;
  fit.window_limit = limit;
  std::sort(radii.begin(), radii.end());
  std::vector<double> lr, ls;
  for (double r : radii) {
    if (r >= limit) continue;
    const int reach = static_cast<int>(std::floor(r / h + 1e-9));
    double sup = 0.0;
    for (int i = std::max(0, base - reach); i <= std::min(n - 1, base + reach); ++i)
      sup = std::max(sup, gap[i]);
    if (sup <= noise_floor) continue;
    fit.radii.push_back(r);
    fit.sup_gap.push_back(sup);
    lr.push_back(std::log(r));
    ls.push_back(std::log(sup));
  }
  if (fit.radii.size() < 6)
    throw PreconditionError("growth fit keeps only " + std::to_string(fit.radii.size()) +
                            " radii inside the window (need 6)");
  fit.exponent = detail::ls_slope(lr, ls);
  return fit;
}

inline GrowthFit growth_exponent_fit(const ObstacleSolution& sol, const ProblemSpec& spec, int base,
                                     std::vector<double> radii, double noise_floor = 1e-10) {
  return growth_exponent_fit(sol.u - spec.obstacle(), base, std::move(radii), noise_floor);
}

}  // namespace fraclab
