#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "fraclab/obstacle/operator.hpp"
#include "fraclab/op/kernel.hpp"
#include "fraclab/op/normalization.hpp"
#include "fraclab/op/spectral.hpp"

using namespace fraclab;

namespace {

// (-Delta)^s exp(-x^2) on the line = 4^s Gamma(1/2 + s) / Gamma(1/2) 1F1(1/2 + s; 1/2; -x^2).
double gaussian_oracle(double s, double x) {
  return std::pow(4.0, s) * boost::math::tgamma(0.5 + s) / std::sqrt(std::numbers::pi) *
         boost::math::hypergeometric_1F1(0.5 + s, 0.5, -x * x);
}

double relative_error_on(const ScalarField& got, double s, double window) {
  double err = 0.0, scale = 0.0;
  const GridSpec& g = got.grid();
  for (int i = 0; i < g.nodes_per_axis(); ++i) {
    const double x = g.coord(i);
    if (std::abs(x) > window) continue;
    const double want = gaussian_oracle(s, x);
    err = std::max(err, std::abs(got[i] - want));
    scale = std::max(scale, std::abs(want));
  }
  return err / scale;
}

ScalarField gaussian(const GridSpec& g) {
  return ScalarField::sample(g, [](double x) { return std::exp(-x * x); });
}

}  // namespace

class OperatorOrders : public ::testing::TestWithParam<double> {};
INSTANTIATE_TEST_SUITE_P(Orders, OperatorOrders, ::testing::Values(0.6, 0.75, 0.9));

TEST_P(OperatorOrders, NormalizationCalibrationAgreesWithTheGammaFormula) {
  const double s = GetParam();
  // Equivalent form s 4^s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 - s)).
  const double other = s * std::pow(4.0, s) * boost::math::tgamma(0.5 + s) /
                       (std::sqrt(std::numbers::pi) * boost::math::tgamma(1.0 - s));
  EXPECT_NEAR(normalization_constant(FractionalOrder(s)), other, 1e-8 * other);
  EXPECT_NEAR(normalization_constant(FractionalOrder(s), 2),
              normalization_closed_form(FractionalOrder(s), 2), 1e-6);
}

TEST_P(OperatorOrders, KernelWeightsArePositiveAndDecay) {
  const KernelTable t(FractionalOrder(GetParam()), GridSpec::line(8.0, 257));
  for (int m = 1; m <= t.max_offset(); ++m) ASSERT_GT(t.weight(m), 0.0) << "m = " << m;
  // Decay holds between the curvature correction and the last offset, which also closes
  // the final cell cut by the box edge.
  for (int m = t.curvature_offset() + 1; m + 1 < t.max_offset(); ++m)
    ASSERT_GT(t.weight(m), t.weight(m + 1)) << "m = " << m;
  EXPECT_GT(t.tail(), 0.0);
}

TEST_P(OperatorOrders, QuadratureMatchesTheGaussianClosedForm) {
  const double s = GetParam();
  const GridSpec g = GridSpec::line(8.0, 513);
  const ScalarField out = apply_quadrature(gaussian(g), KernelTable(FractionalOrder(s), g));
  EXPECT_LT(relative_error_on(out, s, 6.0), 1e-3);
}

TEST_P(OperatorOrders, PaddedSpectralMatchesTheGaussianClosedForm) {
  const double s = GetParam();
  const GridSpec g = GridSpec::line(8.0, 513);
  EXPECT_LT(relative_error_on(apply_spectral(gaussian(g), FractionalOrder(s), 8), s, 6.0), 1e-4);
}

TEST_P(OperatorOrders, QuadratureConvergesUnderRefinement) {
  const double s = GetParam();
  double prev = 1.0;
  for (int n : {129, 257, 513}) {
    const GridSpec g = GridSpec::line(8.0, n);
    const double e = relative_error_on(apply_quadrature(gaussian(g), KernelTable(FractionalOrder(s), g)), s, 6.0);
    EXPECT_LT(e, prev) << "n = " << n;
    prev = e;
  }
}

TEST(Quadrature, AnnihilatesConstantsAndPreservesParity) {
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(4.0, 129);
  const KernelTable t(o, g);
  const ScalarField one = ScalarField::sample(g, [](double) { return 1.0; });
  EXPECT_EQ(apply_quadrature(one, t, 1.0).max_abs(), 0.0);
  EXPECT_EQ(apply_quadrature(ScalarField(g), t).max_abs(), 0.0);
  const ScalarField odd = ScalarField::sample(g, [](double x) { return x * std::exp(-x * x); });
  const ScalarField out = apply_quadrature(odd, t);
  const int n = g.nodes_per_axis();
  for (int i = 0; i < n; ++i) EXPECT_NEAR(out[i], -out[n - 1 - i], 1e-12);
}

TEST(Spectral, GridModesAreEigenfunctions) {
  const FractionalOrder o(0.6);
  const GridSpec g = GridSpec::line(8.0, 257);
  const double xi = std::numbers::pi * 5.0 / g.half_width();
  const ScalarField u = ScalarField::sample(g, [=](double x) { return std::cos(xi * x); });
  set_warning_sink([](const std::string&) {});
  const ScalarField out = apply_spectral(u, o);
  set_warning_sink(nullptr);
  const double lam = std::pow(xi, 1.2);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(out[i], lam * u[i], 1e-10 * lam);
}

TEST(Spectral, RieszPotentialInvertsTheOperatorUpToTheMean) {
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(8.0, 257);
  const ScalarField f = ScalarField::sample(g, [](double x) { return x * std::exp(-x * x); });
  const ScalarField back = apply_spectral(riesz_potential(f, o), o);
  double mean = 0.0;
  for (int i = 0; i + 1 < g.nodes_per_axis(); ++i) mean += f[i];
  mean /= g.nodes_per_axis() - 1;
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], f[i] - mean, 1e-10);
}

TEST(DiscreteOperator, IsAnMMatrixEvenWithStrongDrift) {
  const GridSpec g = GridSpec::line(8.0, 129);
  for (double b : {0.0, 0.3, 40.0}) {
    const ProblemSpec spec(FractionalOrder(0.6), CoefficientSpec::constant(g, b, 1.0),
                           obstacles::bump_field(g));
    const DiscreteOperator op(spec);
    const auto& A = op.matrix();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (j != i) {
          ASSERT_LE(A(i, j), 0.0) << "b = " << b << " row " << i;
          off += -A(i, j);
        }
      ASSERT_GE(A(i, i), off) << "b = " << b << " row " << i;
    }
    if (b == 40.0) EXPECT_GT(op.upwind_rows(), 0);
  }
}
