#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fraclab/linear/solver.hpp"

using namespace fraclab;

namespace {

ProblemSpec drifted_spec(const GridSpec& g, double s, double b_amp, double c_amp) {
  const auto b = ScalarField::sample(g, [=](double x) { return b_amp * std::sin(x); });
  const auto c = ScalarField::sample(g, [=](double x) { return 1.0 + c_amp * std::exp(-x * x); });
  return ProblemSpec(FractionalOrder(s), CoefficientSpec(b, c, 1.0), obstacles::bump_field(g));
}

}  // namespace

TEST(SolveModel, InvertsTheSymbolOnAGridMode) {
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(8.0, 257);
  const double xi = std::numbers::pi * 4.0 / g.half_width();
  const double lam = std::pow(xi, 1.5) + 2.0;
  const auto f = ScalarField::sample(g, [=](double x) { return lam * std::cos(xi * x); });
  const auto u = solve_model(f, 2.0, o);
  for (int i = 0; i < g.nodes_per_axis(); ++i) EXPECT_NEAR(u[i], std::cos(xi * g.coord(i)), 1e-12);
  EXPECT_EQ(solve_model(ScalarField(g), 2.0, o).max_abs(), 0.0);
}

TEST(SolveDrifted, NoPerturbationMeansOneModelSolve) {
  const GridSpec g = GridSpec::line(8.0, 257);
  const ProblemSpec spec(FractionalOrder(0.6), CoefficientSpec::constant(g, 0.0, 1.5), obstacles::bump_field(g));
  const auto f = ScalarField::sample(g, [](double x) { return std::exp(-x * x); });
  const auto rep = solve_drifted(f, spec);
  EXPECT_LE(rep.iterations, 2);  // the second sweep only confirms the fixed point
  EXPECT_LT(sup_distance(rep.solution, solve_model(f, 1.5, spec.order())), 1e-14);
}

class LinearOrders : public ::testing::TestWithParam<double> {};
INSTANTIATE_TEST_SUITE_P(Orders, LinearOrders, ::testing::Values(0.6, 0.75, 0.9));

TEST_P(LinearOrders, RecoversAManufacturedSolution) {
  const GridSpec g = GridSpec::line(8.0, 513);
  const ProblemSpec spec = drifted_spec(g, GetParam(), 0.4, 0.5);
  const auto exact = ScalarField::sample(g, [](double x) { return std::exp(-x * x) * (1.0 + 0.3 * x); });
  const auto f = apply_spectral_operator(exact, spec);
  LinearSolveOptions opt;
  opt.tol = 1e-12;
  const auto rep = solve_drifted(f, spec, opt);
  EXPECT_LT(sup_distance(rep.solution, exact), 1e-6);
  EXPECT_LT(rep.residual_inf, 1e-8);
}

TEST_P(LinearOrders, SupEstimateOnRandomSmoothData) {
  const GridSpec g = GridSpec::line(8.0, 257);
  const ProblemSpec spec = drifted_spec(g, GetParam(), 0.3, 0.8);
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> centre(-3.0, 3.0), width(0.3, 1.2), amp(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    double c[3], w[3], a[3];
    for (int k = 0; k < 3; ++k) c[k] = centre(rng), w[k] = width(rng), a[k] = amp(rng);
    const auto f = ScalarField::sample(g, [&](double x) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += a[k] * std::exp(-std::pow((x - c[k]) / w[k], 2));
      return v;
    });
    const auto rep = solve_drifted(f, spec);
    EXPECT_LE(rep.sup_ratio, 1.0 + 5e-2) << "trial " << trial;
  }
}

TEST(ComparisonCheck, NonNegativeDataGivesNonNegativeSolutions) {
  const GridSpec g = GridSpec::line(8.0, 257);
  const ProblemSpec spec = drifted_spec(g, 0.75, 0.5, 0.5);
  const auto f = ScalarField::sample(g, [](double x) { return std::exp(-4.0 * x * x); });
  EXPECT_GE(comparison_check(solve_drifted(f, spec).solution), -1e-6);
  EXPECT_EQ(comparison_check(ScalarField(g)), 0.0);
  EXPECT_EQ(comparison_check(ScalarField::sample(g, [](double) { return 1.0; })), 1.0);
}
