#pragma once

#include <Eigen/Dense>

#include "fraclab/core/problem.hpp"
#include "fraclab/op/kernel.hpp"

namespace fraclab {

inline Eigen::VectorXd to_eigen(const ScalarField& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.values().data(), static_cast<Eigen::Index>(u.size()));
}

inline ScalarField from_eigen(const GridSpec& g, const Eigen::VectorXd& v) {
  return ScalarField(g, std::vector<double>(v.data(), v.data() + v.size()));
}

// Dense matrix of L = (-Delta)^s + b d/dx + c on the box nodes under zero extension:
// quadrature stencil, central drift (one-sided upwind on the end rows and on rows where
// central would give a positive off-diagonal), and the potential. The result is a
// row-diagonally-dominant M-matrix, so L u >= 0 implies u >= 0 on the grid.
class DiscreteOperator {
 public:
  explicit DiscreteOperator(const ProblemSpec& spec)
      : DiscreteOperator(spec, KernelTable(spec.order(), spec.grid())) {}

  DiscreteOperator(const ProblemSpec& spec, const KernelTable& table) : grid_(spec.grid()) {
    require(table.grid() == spec.grid(), "kernel table was built for a different grid");
    const int n = grid_.nodes_per_axis();
    const double h = grid_.spacing();
    const auto& b = spec.coeffs().drift();
    const auto& c = spec.coeffs().potential();
    double diag = table.tail();
    for (int m = 1; m <= table.max_offset(); ++m) diag += 2.0 * table.weight(m);
    A_.setZero(n, n);
    for (int i = 0; i < n; ++i) {
      A_(i, i) = diag + c[i];
      for (int j = 0; j < n; ++j)
        if (j != i) A_(i, j) = -table.weight(j - i);
      const double half = 0.5 * b[i] / h;
      // The two end rows miss a neighbour, so a central stencil there would leave an
      // unbalanced -b/2h and break diagonal dominance; they always take the upwind form.
      const bool interior = i > 0 && i + 1 < n;
      if (interior && std::abs(half) <= table.weight(1)) {
        A_(i, i + 1) += half;
        A_(i, i - 1) -= half;
      } else {
        upwind_rows_ += interior;
        const double v = b[i] / h;
        A_(i, i) += std::abs(v);
        if (v > 0.0 && i - 1 >= 0) A_(i, i - 1) -= v;
        if (v < 0.0 && i + 1 < n) A_(i, i + 1) += v;
      }
    }
  }

  const GridSpec& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return A_; }
  int upwind_rows() const { return upwind_rows_; }

  ScalarField apply(const ScalarField& u) const {
    require(u.grid() == grid_, "field lives on a different grid");
    return from_eigen(grid_, A_ * to_eigen(u));
  }

 private:
  GridSpec grid_;
  Eigen::MatrixXd A_;
  int upwind_rows_ = 0;
};

}  // namespace fraclab
