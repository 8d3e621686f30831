#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fraclab/extension/diagnostics.hpp"
#include "fraclab/extension/frequency.hpp"
#include "fraclab/extension/height.hpp"
#include "fraclab/extension/poisson.hpp"
#include "fraclab/obstacle/solve.hpp"

using namespace fraclab;

namespace {

ExtensionField power_field(const FractionalOrder& o, double k, double scale = 1.0) {
  ExtensionModel m;
  m.value = [k, scale](double x, double y) { return scale * std::pow(std::hypot(x, y), k); };
  return ExtensionField(HalfSpaceGrid(GridSpec::line(2.0, 33), o, 1.0, 8), o, std::move(m));
}

ScalarField gaussian(const GridSpec& g) {
  return ScalarField::sample(g, [](double x) { return std::exp(-x * x); });
}

}  // namespace

class ExtensionOrders : public ::testing::TestWithParam<double> {};
INSTANTIATE_TEST_SUITE_P(Orders, ExtensionOrders, ::testing::Values(0.6, 0.75, 0.9));

// psi(t) = (2^{1-s}/Gamma(s)) t^s K_s(t), psi'(t) = -(2^{1-s}/Gamma(s)) t^s K_{1-s}(t).
TEST_P(ExtensionOrders, SymbolMatchesTheBesselClosedForm) {
  const double s = GetParam();
  const PoissonSymbol psi{FractionalOrder(s)};
  const double pre = std::pow(2.0, 1.0 - s) / std::tgamma(s);
  EXPECT_EQ(psi.value(0.0), 1.0);
  for (double t : {0.05, 0.3, 0.99, 1.01, 2.5, 7.0, 20.0}) {
    const double v = pre * std::pow(t, s) * std::cyl_bessel_k(s, t);
    const double d = -pre * std::pow(t, s) * std::cyl_bessel_k(1.0 - s, t);
    EXPECT_NEAR(psi.value(t), v, 1e-10 * std::max(v, 1e-12)) << "t = " << t;
    EXPECT_NEAR(psi.derivative(t), d, 1e-9 * std::abs(d)) << "t = " << t;
    EXPECT_NEAR(psi.excess(t), v - 1.0, 1e-10) << "t = " << t;
  }
  // t^{1-2s} psi'(t) -> -pre lim t^{1-s} K_{1-s}(t) = -pre Gamma(1-s) 2^{-s}.
  EXPECT_NEAR(psi.flux_constant(), pre * std::tgamma(1.0 - s) * std::pow(2.0, -s), 1e-12);
  EXPECT_NEAR(psi.leading_coefficient(), psi.flux_constant() / (2.0 * s), 1e-12);
}

// The symbol solves psi'' + ((1 - 2s)/t) psi' = psi.
TEST_P(ExtensionOrders, SymbolSolvesTheWeightedOde) {
  const double s = GetParam();
  const PoissonSymbol psi{FractionalOrder(s)};
  for (double t : {0.4, 1.5, 4.0}) {
    const double dt = 1e-4;
    const double second = (psi.derivative(t + dt) - psi.derivative(t - dt)) / (2.0 * dt);
    EXPECT_NEAR(second + (1.0 - 2.0 * s) / t * psi.derivative(t), psi.value(t), 1e-6) << "t = " << t;
  }
}

// The fitted flux constant converges to the symbol's as the rows crowd toward the trace.
TEST_P(ExtensionOrders, FluxIsTheDirichletToNeumannMap) {
  const FractionalOrder o(GetParam());
  const GridSpec g = GridSpec::line(8.0, 257);
  const double kappa = PoissonSymbol(o).flux_constant();
  double prev = 1.0;
  for (int rows : {64, 128, 256}) {
    const DtnReport rep = dtn_check(gaussian(g), o, HalfSpaceGrid::over(g, o, rows));
    EXPECT_FALSE(rep.degenerate);
    const double err = std::abs(rep.kappa / kappa - 1.0);
    EXPECT_LE(err, prev) << "rows = " << rows;
    if (rows >= 128) {
      EXPECT_LT(err, 1e-3) << "rows = " << rows;
      EXPECT_GE(rep.correlation, 0.99999);
    }
    prev = err;
  }
}

TEST(PoissonExtend, ReproducesTheTraceAndConstants) {
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(4.0, 129);
  const HalfSpaceGrid hg = HalfSpaceGrid::over(g, o, 16);
  const ScalarField f = gaussian(g);
  const ExtensionField v = poisson_extend(f, o, hg);
  for (int i = 0; i < g.nodes_per_axis(); ++i) EXPECT_NEAR(v.at(i, 0), f[i], 1e-12);
  // Max principle: the extension of a positive bump stays in (0, max g].
  for (int j = 1; j <= hg.rows(); ++j)
    for (int i = 0; i < g.nodes_per_axis(); i += 8) {
      EXPECT_LE(v.at(i, j), 1.0 + 1e-12);
      EXPECT_GT(v.at(i, j), -1e-12);
    }
  ExtensionOptions kernel;
  kernel.method = ExtensionMethod::KernelSum;
  const ScalarField one = ScalarField::sample(g, [](double) { return 1.0; });
  const ExtensionField c = poisson_extend(one, o, hg, kernel);
  for (int j = 1; j <= hg.rows(); j += 5) EXPECT_NEAR(c.at(64, j), 1.0, 1e-12);
}

TEST(LaResidual, ShrinksUnderRefinement) {
  const FractionalOrder o(0.75);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const GridSpec g = GridSpec::line(8.0, (128 << k) + 1);
    const double res = la_residual(poisson_extend(gaussian(g), o, HalfSpaceGrid::over(g, o, 32 << k)));
    EXPECT_LT(res, prev) << "level " << k;
    prev = res;
  }
}

// F(r) = omega r^{1+a+2k} for v = |(x, y)|^k, so Phi is constant 1 + a + 2k.
TEST_P(ExtensionOrders, PhiOfAHomogeneousFieldIsItsDegree) {
  const FractionalOrder o(GetParam());
  const FrequencyParams p = FrequencyParams::defaults(o, 0.5);
  const auto radii = geometric_radii(0.5, 0.02);
  for (double k : {1.0, 1.3, 1.0 + o.s()}) {
    const FrequencyCurve c = frequency_curve(power_field(o, k), radii, p);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      EXPECT_NEAR(c.Phi[i], 1.0 + o.a() + 2.0 * k, 1e-3) << "k = " << k << " r = " << radii[i];
      EXPECT_FALSE(c.trunc_active[i]);
    }
    EXPECT_EQ(monotonicity_check(c, p).C, 0.0);
    const FrequencyLimit lim = frequency_limit(c, o, p);
    EXPECT_NEAR(lim.phi0, 1.0 + o.a() + 2.0 * k, 1e-3);
    // d_r / r^{1+p} ~ r^{k - 1 - p}: bounded only once k reaches 1 + p.
    EXPECT_EQ(lim.branch, k >= 1.0 + p.p() ? FrequencyBranch::ContactRate : FrequencyBranch::Growth);
  }
}

TEST_P(ExtensionOrders, TruncationTakesOverForTinyFields) {
  const FractionalOrder o(GetParam());
  const FrequencyParams p = FrequencyParams::defaults(o, 0.5);
  const FrequencyCurve c = frequency_curve(power_field(o, 3.0, 1e-8), geometric_radii(0.5, 0.02), p);
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    EXPECT_TRUE(c.trunc_active[i]);
    EXPECT_NEAR(c.Phi[i], p.truncation_exponent(), 1e-3);
  }
}

TEST(FrequencyParams, EnforceTheAdmissibleRanges) {
  const FractionalOrder o(0.6);
  EXPECT_THROW(FrequencyParams(o, 0.6, 0.1, 0.5), PreconditionError);   // alpha <= 2s - 1
  EXPECT_THROW(FrequencyParams(o, 0.5, 0.55, 0.5), PreconditionError);  // p < s
  EXPECT_THROW(FrequencyParams(o, 0.7, 0.55, 0.5), PreconditionError);  // gamma <= 0
  for (double s : {0.6, 0.75, 0.9}) {
    const FrequencyParams d = FrequencyParams::defaults(FractionalOrder(s), 0.5);
    EXPECT_GT(d.gamma(), 0.0);
  }
}

// The closed-form C against a scan: the smallest grid C making e^{C r^gamma} Phi non-decreasing.
TEST(MonotonicityCheck, MatchesABruteForceScan) {
  const FrequencyParams p = FrequencyParams::defaults(FractionalOrder(0.75), 0.5);
  const auto radii = geometric_radii(0.5, 0.01);
  std::vector<double> phi;
  for (double r : radii) phi.push_back(4.0 - 0.8 * std::pow(r, 0.4) + 0.05 * std::sin(20.0 * r));
  const MonotonicityReport rep = monotonicity_check(radii, phi, p, 100.0, 1e-3);
  ASSERT_TRUE(rep.passed);
  auto admissible = [&](double C) {
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
      // radii run largest first
      const double hi = std::exp(C * std::pow(radii[k], p.gamma())) * phi[k];
      const double lo = std::exp(C * std::pow(radii[k + 1], p.gamma())) * phi[k + 1];
      if (hi < lo - 1e-3 * std::abs(lo)) return false;
    }
    return true;
  };
  double brute = -1.0;
  for (int i = 0; i <= 200'000; ++i)
    if (admissible(i * 1e-4)) {
      brute = i * 1e-4;
      break;
    }
  ASSERT_GE(brute, 0.0);
  EXPECT_GT(rep.C, 0.0);
  EXPECT_NEAR(rep.C, brute, 1.5e-4);

  std::vector<double> negative = phi;
  negative[3] = -1.0;
  EXPECT_FALSE(monotonicity_check(radii, negative, p).passed);
}

TEST(Rescale, NormalizesOnTheUnitSphere) {
  const FractionalOrder o(0.75);
  const ExtensionField v = power_field(o, 1.7);
  for (double r : {0.05, 0.2, 0.6}) {
    const Rescaling rs = rescale(v, r);
    EXPECT_NEAR(rs.normalization, 1.0, 1e-12);
    EXPECT_NEAR(rs.v_r(0.6, 0.8), v.value(0.6 * r, 0.8 * r) / rs.d_r, 1e-14);
  }
  EXPECT_THROW(rescale(power_field(o, 1.0, 0.0), 0.3), PreconditionError);
}

TEST_P(ExtensionOrders, BoundaryMeanSlopeOfAPower) {
  const FractionalOrder o(GetParam());
  const double alpha = FrequencyParams::defaults(o, 0.5).alpha();
  const std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  const BoundaryMeanReport fast = boundary_mean_check(power_field(o, 2.0 * o.s() + alpha), radii, o, alpha);
  EXPECT_NEAR(fast.slope, 2.0 * o.s() + alpha, 1e-6);
  for (double m : fast.mean) EXPECT_GT(m, 0.0);
  EXPECT_TRUE(fast.passed);
  const BoundaryMeanReport slow = boundary_mean_check(power_field(o, 0.5), radii, o, alpha);
  EXPECT_NEAR(slow.slope, 0.5, 1e-6);
  EXPECT_FALSE(slow.passed);
}

TEST(GrowthFit, RecoversPowerLaws) {
  const GridSpec g = GridSpec::line(1.0, 257);
  const int base = g.center_index();
  for (double k : {1.6, 1.75, 2.0}) {
    const ScalarField two_sided = ScalarField::sample(g, [k](double x) { return std::pow(std::abs(x), k); });
    EXPECT_NEAR(growth_exponent_fit(two_sided, base, cell_radii(g.spacing())).exponent, k, 1e-9);
    const ScalarField one_sided = ScalarField::sample(g, [k](double x) { return x > 0 ? std::pow(x, k) : 0.0; });
    EXPECT_NEAR(growth_exponent_fit(one_sided, base, cell_radii(g.spacing())).exponent, k, 1e-9);
  }
  const ScalarField shifted = ScalarField::sample(g, [](double x) { return 1.0 + x * x; });
  EXPECT_THROW(growth_exponent_fit(shifted, base, cell_radii(g.spacing())), PreconditionError);
  EXPECT_THROW(cell_radii(0.0), PreconditionError);
}

// Window limit: radii reaching into a second free region on the contact side are dropped.
TEST(GrowthFit, StopsAtTheNextFreeRegion) {
  const GridSpec g = GridSpec::line(1.0, 257);
  const int base = g.center_index();
  const double h = g.spacing();
  const ScalarField gap = ScalarField::sample(g, [h](double x) {
    if (x > 0) return x * x;
    return x < -20.5 * h ? 5.0 : 0.0;
  });
  const GrowthFit fit = growth_exponent_fit(gap, base, cell_radii(h, {2, 4, 6, 8, 10, 12, 16, 20, 24}));
  EXPECT_NEAR(fit.window_limit, 21 * h, 1e-12);
  EXPECT_EQ(fit.radii.size(), 8u);
  EXPECT_NEAR(fit.exponent, 2.0, 1e-9);
}

TEST_P(ExtensionOrders, RellichIdentityConvergesForAGaussian) {
  const FractionalOrder o(GetParam());
  double prev = 1.0;
  for (int k = 0; k < 3; ++k) {
    const GridSpec g = GridSpec::line(8.0, (64 << k) + 1);
    const ExtensionField v = poisson_extend(gaussian(g), o, HalfSpaceGrid(g, o, 2.0, 16 << k));
    RellichOptions opt;
    opt.angular_panels = 4 << k;
    opt.radial_panels = 2 << k;
    opt.trace_panels = 8 << k;
    const double res = rellich_residual(v, 1.0, opt).residual;
    EXPECT_LT(res, prev) << "level " << k;
    prev = res;
  }
  EXPECT_LT(prev, 1e-4);
}

// v = x is even in y, L_a-harmonic and has zero flux: the identity holds with rhs = a int |y|^a.
TEST(Rellich, HoldsForTheLinearField) {
  const FractionalOrder o(0.6);
  ExtensionModel m;
  m.value = [](double x, double) { return x; };
  m.gradient = [](double, double) { return std::array<double, 2>{1.0, 0.0}; };
  m.flux = [](double) { return 0.0; };
  m.slope = [](double) { return 1.0; };
  const ExtensionField v(HalfSpaceGrid(GridSpec::line(2.0, 33), o, 1.0, 8), o, m);
  const RellichReport rep = rellich_residual(v, 0.7);
  EXPECT_NE(rep.lhs, 0.0);
  EXPECT_LT(rep.residual, 1e-10);
}

TEST(HeightFunction, VanishesWithZeroFluxAtTheBasePoint) {
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(2.0, 257);
  const ProblemSpec spec(o, CoefficientSpec::constant(g, 0.3, 1.0), obstacles::bump_field(g));
  const ObstacleSolution sol = complementarity_polish(spec, obstacle_solve(spec));
  ASSERT_EQ(sol.free_boundary.size(), 2u);
  const HalfSpaceGrid hg = HalfSpaceGrid::over(g, o);
  for (int base : sol.free_boundary) {
    const HeightFunction hf = height_function(sol, spec, base, hg);
    EXPECT_EQ(hf.origin_shift, 0.0);
    EXPECT_LT(std::abs(hf.v.value(0.0, 0.0)), 1e-12);
    EXPECT_LT(std::abs(hf.v.flux(0.0)), 1e-9);
    const ScalarField trace = hf.v.trace();
    EXPECT_GE(trace.min(), -1e-12);

    HeightOptions sub;
    sub.subgrid_origin = true;
    const HeightFunction hs = height_function(sol, spec, base, hg, sub);
    EXPECT_LE(std::abs(hs.origin_shift), g.spacing());
    EXPECT_LT(std::abs(hs.v.flux(0.0)), 1e-9);
  }
  EXPECT_THROW(height_function(sol, spec, g.center_index() - 100, hg), PreconditionError);
}
