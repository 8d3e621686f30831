#pragma once

#include <cmath>

#include "fraclab/core/problem.hpp"
#include "fraclab/op/spectral.hpp"

namespace fraclab {

// Inverse transform of f^ / (|xi|^{2s} + c0).
inline ScalarField solve_model(const ScalarField& f, double c0, const FractionalOrder& order) {
  require(std::isfinite(c0) && c0 > 0.0, "model solve needs c0 > 0");
  PeriodicBox box(f.grid());
  const double two_s = 2.0 * order.s();
  return box.apply(f, [=](double xi) { return 1.0 / (std::pow(xi, two_s) + c0); });
}

// L u = (-Delta)^s u + b u' + c u with the spectral operator and central-difference gradient.
inline ScalarField apply_spectral_operator(const ScalarField& u, const ProblemSpec& spec) {
  ScalarField out = apply_spectral(u, spec.order());
  const ScalarField du = gradient(u)[0];
  const auto& b = spec.coeffs().drift();
  const auto& c = spec.coeffs().potential();
  for (std::size_t i = 0; i < u.size(); ++i) out[i] += b[i] * du[i] + c[i] * u[i];
  return out;
}

struct LinearSolveReport {
  ScalarField solution;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
  // ||u|| c0 / ||f||; at most 1 up to discretization when c >= c0 > 0.
  double sup_ratio = 0.0;
};

struct LinearSolveOptions {
  double tol = 1e-9;
  int max_iter = 500;
  // Relaxation factor omega in (0, 1].
  double relaxation = 1.0;
  // Residual is measured on nodes at least this many cells from the box faces.
  int boundary_layer = 4;
};

// Fixed point on the lower-order terms:
//   u^{m+1} = solve_model(f - b u^m' - (c - c0) u^m, c0).
inline LinearSolveReport solve_drifted(const ScalarField& f, const ProblemSpec& spec,
                                       const LinearSolveOptions& opt = {},
                                       const ScalarField* initial = nullptr) {
  const double c0 = spec.coeffs().floor();
  require(c0 > 0.0, "drifted solve needs a strictly positive potential floor");
  require(opt.relaxation > 0.0 && opt.relaxation <= 1.0, "relaxation must lie in (0, 1]");
  require(f.grid() == spec.grid(), "right-hand side lives on a different grid");
  const auto& b = spec.coeffs().drift();
  const auto& c = spec.coeffs().potential();

  LinearSolveReport rep{initial ? *initial : ScalarField(f.grid())};
  ScalarField& u = rep.solution;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const ScalarField du = gradient(u)[0];
    ScalarField rhs = f;
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] -= b[i] * du[i] + (c[i] - c0) * u[i];
    ScalarField next = solve_model(rhs, c0, spec.order());
    if (opt.relaxation < 1.0) next = opt.relaxation * next + (1.0 - opt.relaxation) * u;
    const double change = sup_distance(next, u);
    u = std::move(next);
    rep.iterations = it;
    if (change <= opt.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw ConvergenceError("drifted solve did not converge in " + std::to_string(opt.max_iter) +
                           " iterations; try relaxation < 1");

  const ScalarField Lu = apply_spectral_operator(u, spec);
  const int n = f.grid().nodes_per_axis();
  for (int i = opt.boundary_layer; i < n - opt.boundary_layer; ++i)
    rep.residual_inf = std::max(rep.residual_inf, std::abs(Lu[i] - f[i]));
  const double fmax = f.max_abs();
  rep.sup_ratio = fmax > 0.0 ? u.max_abs() * c0 / fmax : 0.0;
  return rep;
}

// Most negative nodal value of u; non-negative means no comparison-principle violation.
inline double comparison_check(const ScalarField& u) { return u.min(); }

}  // namespace fraclab
