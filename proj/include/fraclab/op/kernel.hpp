#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fraclab/core/field.hpp"
#include "fraclab/core/quadrature.hpp"
#include "fraclab/op/normalization.hpp"

namespace fraclab {

// Product-integration weights for the singular integral in 1-D.
//
// With D_m(x) = 2u(x) - u(x + mh) - u(x - mh) and G(z) = D(z)/z^2 (even, smooth),
//   (-Delta)^s u(x) = c * int_0^inf G(z) z^{1-2s} dz.
// G is interpolated by local cubics on the nodes z = mh (G(0) = -u'' by a fourth-order
// difference, G(-z) = G(z)), and the moments of z^{1-2s} against each cubic are exact.
// Beyond z = Z = n h every x +- z leaves the box, so that part is 2u(x) Z^{-2s}/(2s).
// The result is the stencil  sum_{m<n} w_m D_m + tail * u(x)  with w_m > 0.
class KernelTable {
 public:
  KernelTable(FractionalOrder order, GridSpec grid)
      : order_(order), grid_(grid), cns_(normalization_constant(order, 1)) {
    require(grid.dim() == 1, "kernel table is 1-D only");
    const int n = grid.nodes_per_axis();
    const double h = grid.spacing();
    const double s = order.s();
    const double beta = 1.0 - 2.0 * s;
    reach_ = n;

    // Coefficients of G_m, m = 0 .. reach + 1.
    std::vector<double> coef_g(reach_ + 2, 0.0);
    const double scale = std::pow(h, 2.0 - 2.0 * s);
    for (int j = 0; j < reach_; ++j) {
      const auto mom = cell_moments(j, beta);
      for (int k = 0; k < 4; ++k) {
        const int m = std::abs(j - 1 + k);
        coef_g[m] += scale * mom[k];
      }
    }

    w_.assign(reach_ + 2, 0.0);
    for (int m = 1; m <= reach_ + 1; ++m) w_[m] = cns_ * coef_g[m] / ((m * h) * (m * h));
    // G(0) = (a D_1 + d D_m) / h^2 is fourth-order for a = m^2/(m^2-1), d = -1/(m^2(m^2-1)).
    // The smallest m whose own weight absorbs the negative part keeps every w_m > 0.
    const double c0 = cns_ * coef_g[0] / (h * h);
    int far = 2;
    while (far < n - 1) {
      const double m2 = double(far) * far;
      if (w_[far] - c0 / (m2 * (m2 - 1.0)) > 0.25 * w_[far]) break;
      ++far;
    }
    const double m2 = double(far) * far;
    w_[1] += c0 * m2 / (m2 - 1.0);
    w_[far] -= c0 / (m2 * (m2 - 1.0));
    g0_offset_ = far;

    // Offsets >= n reach outside the box from every node: D_m = 2u(x) there.
    const double Z = reach_ * h;
    tail_ = cns_ * std::pow(Z, -2.0 * s) / s;
    for (int m = n; m <= reach_ + 1; ++m) tail_ += 2.0 * w_[m];
    w_.resize(n);
    for (int m = 1; m < n; ++m)
      if (!(w_[m] > 0.0))
        throw ConvergenceError("kernel weight lost positivity at offset " + std::to_string(m));
  }

  const FractionalOrder& order() const { return order_; }
  const GridSpec& grid() const { return grid_; }
  double cns() const { return cns_; }
  // Largest offset carrying a weight.
  int max_offset() const { return static_cast<int>(w_.size()) - 1; }
  // Weight of the symmetric difference at offset m >= 1 (normalization included).
  double weight(int m) const { return w_[std::abs(m)]; }
  // Outer offset of the fourth-order difference used for G(0).
  int curvature_offset() const { return g0_offset_; }
  // Coefficient of u(x) from the region where both x +- z lie outside the box.
  double tail() const { return tail_; }

 private:
  // int_0^1 L_k(t) (j + t)^beta dt for the cubic Lagrange basis on t = -1, 0, 1, 2.
  static std::array<double, 4> cell_moments(int j, double beta) {
    // Monomial coefficients of L_{-1}, L_0, L_1, L_2.
    static constexpr double P[4][4] = {
        {0.0, -1.0 / 3.0, 0.5, -1.0 / 6.0},
        {1.0, -0.5, -1.0, 0.5},
        {0.0, 1.0, 0.5, -0.5},
        {0.0, -1.0 / 6.0, 0.0, 1.0 / 6.0},
    };
    std::array<double, 4> out{};
    if (j == 0) {
      for (int k = 0; k < 4; ++k)
        for (int p = 0; p < 4; ++p) out[k] += P[k][p] / (p + beta + 1.0);
      return out;
    }
    const auto& gl = gauss_legendre_20();
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = 0.5 * (gl.nodes[q] + 1.0);
      const double w = 0.5 * gl.weights[q] * std::pow(j + t, beta);
      for (int k = 0; k < 4; ++k)
        out[k] += w * (P[k][0] + t * (P[k][1] + t * (P[k][2] + t * P[k][3])));
    }
    return out;
  }

  FractionalOrder order_;
  GridSpec grid_;
  double cns_;
  int reach_ = 0;
  int g0_offset_ = 2;
  std::vector<double> w_;
  double tail_ = 0.0;
};

// Quadrature fractional Laplacian. Values outside the box equal `far_value` (zero by default).
inline ScalarField apply_quadrature(const ScalarField& u, const KernelTable& table,
                                    double far_value = 0.0) {
  require(u.grid() == table.grid(), "kernel table was built for a different grid");
  require(u.all_finite(), "input field is not finite");
  const int n = u.grid().nodes_per_axis();
  const int M = table.max_offset();
  auto at = [&](int i) { return (i < 0 || i >= n) ? far_value : u[i]; };
  ScalarField out(u.grid());
  for (int i = 0; i < n; ++i) {
    const double ui = u[i];
    double acc = 0.0;
    for (int m = 1; m <= M; ++m) acc += table.weight(m) * (2.0 * ui - at(i + m) - at(i - m));
    out[i] = acc + table.tail() * (ui - far_value);
  }
  return out;
}

}  // namespace fraclab
