#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/core/field.hpp"

namespace fraclab {

// Drift b and potential c sampled on grid nodes, with the asserted floor c0 <= min c.
class CoefficientSpec {
 public:
  CoefficientSpec(ScalarField drift, ScalarField potential, double c0)
      : b_(std::move(drift)), c_(std::move(potential)), c0_(c0) {
    require(b_.grid() == c_.grid(), "drift and potential must share a grid");
    require(b_.grid().dim() == 1, "coefficients are 1-D only");
    require(b_.all_finite() && c_.all_finite(), "coefficients must be finite");
    require(std::isfinite(c0) && c0 >= 0.0, "potential floor c0 must be non-negative");
    require(c_.min() >= c0 - 1e-14, "potential c drops below its asserted floor c0");
    const double h = b_.grid().spacing();
    double lip = 0.0;
    for (std::size_t i = 1; i < b_.size(); ++i)
      lip = std::max(lip, std::abs(b_[i] - b_[i - 1]) / h);
    lipschitz_ = lip;
  }

  static CoefficientSpec constant(GridSpec grid, double drift, double potential) {
    return {ScalarField::sample(grid, [=](double) { return drift; }),
            ScalarField::sample(grid, [=](double) { return potential; }), potential};
  }

  const ScalarField& drift() const { return b_; }
  const ScalarField& potential() const { return c_; }
  double floor() const { return c0_; }
  // Finite-difference Lipschitz estimate of b on the grid; diagnostics only.
  double drift_lipschitz() const { return lipschitz_; }
  double drift_sup() const { return b_.max_abs(); }
  bool drift_free() const { return b_.max_abs() == 0.0; }

 private:
  ScalarField b_;
  ScalarField c_;
  double c0_;
  double lipschitz_ = 0.0;
};

// Everything that defines L u = (-Delta)^s u + b u' + c u and the obstacle.
// Values outside the box are taken to be zero.
class ProblemSpec {
 public:
  ProblemSpec(FractionalOrder order, CoefficientSpec coeffs, ScalarField obstacle,
              double decay_tol = 1e-6)
      : order_(order), coeffs_(std::move(coeffs)), phi_(std::move(obstacle)) {
    require(coeffs_.drift().grid() == phi_.grid(), "obstacle and coefficients must share a grid");
    require(phi_.all_finite(), "obstacle must be finite");
    const GridSpec& g = phi_.grid();
    const int n = g.nodes_per_axis();
    const int band = std::max(1, n / 10);
    double edge = 0.0;
    for (int i = 0; i < band; ++i)
      edge = std::max({edge, std::abs(phi_[i]), std::abs(phi_[n - 1 - i])});
    require(edge <= decay_tol, "obstacle does not decay on the outer 10% of the box (max " +
                                   std::to_string(edge) + ")");
  }

  const FractionalOrder& order() const { return order_; }
  const GridSpec& grid() const { return phi_.grid(); }
  const CoefficientSpec& coeffs() const { return coeffs_; }
  const ScalarField& obstacle() const { return phi_; }

  ProblemSpec with_obstacle(ScalarField phi, double decay_tol = 1e-6) const {
    return ProblemSpec(order_, coeffs_, std::move(phi), decay_tol);
  }

 private:
  FractionalOrder order_;
  CoefficientSpec coeffs_;
  ScalarField phi_;
};

// Named obstacle profiles, C^2 and constant outside a compact set.
namespace obstacles {

// height * (1 - ((x - center)/width)^2)_+^3
inline double bump(double x, double center = 0.0, double width = 1.0, double height = 1.0) {
  const double t = (x - center) / width;
  const double q = 1.0 - t * t;
  return q > 0.0 ? height * q * q * q : 0.0;
}

inline ScalarField bump_field(GridSpec g, double center = 0.0, double width = 1.0,
                              double height = 1.0) {
  return ScalarField::sample(g, [=](double x) { return bump(x, center, width, height); });
}

inline ScalarField two_bumps_field(GridSpec g, double separation = 2.0, double width = 0.8,
                                   double height = 1.0) {
  return ScalarField::sample(g, [=](double x) {
    return bump(x, -0.5 * separation, width, height) + bump(x, 0.5 * separation, width, height);
  });
}

// Strictly negative everywhere: a bump dip on top of a floor -offset that stays inside the
// decay tolerance at the box edges. The solution is identically zero and never touches it.
inline ScalarField negative_field(GridSpec g, double width = 1.0, double depth = 1.0,
                                  double offset = 1e-8) {
  return ScalarField::sample(g, [=](double x) { return -bump(x, 0.0, width, depth) - offset; });
}

}  // namespace obstacles

}  // namespace fraclab
