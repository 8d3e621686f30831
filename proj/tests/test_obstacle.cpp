#include <gtest/gtest.h>

#include <cmath>

#include "fraclab/obstacle/solve.hpp"

using namespace fraclab;

namespace {

ProblemSpec catalog_spec(const GridSpec& g, double s, const std::string& kind, double b = 0.3) {
  ScalarField phi = kind == "bump"           ? obstacles::bump_field(g)
                    : kind == "shifted-bump" ? obstacles::bump_field(g, 0.3)
                    : kind == "two-bumps"    ? obstacles::two_bumps_field(g, 1.4, 0.5)
                                             : obstacles::negative_field(g);
  return ProblemSpec(FractionalOrder(s), CoefficientSpec::constant(g, b, 1.0), std::move(phi));
}

}  // namespace

TEST(Penalty, IsThePositivePartOverEpsilon) {
  EXPECT_EQ(beta_eps(-3.0, 0.1), 0.0);
  EXPECT_EQ(beta_eps(0.0, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(beta_eps(0.5, 0.1), 5.0);
  EXPECT_THROW(beta_eps(1.0, 0.0), PreconditionError);
}

struct TrajectoryCase {
  double s;
  const char* kind;
  PenaltyIteration iteration;
};

class Trajectories : public ::testing::TestWithParam<TrajectoryCase> {};
INSTANTIATE_TEST_SUITE_P(
    Catalog, Trajectories,
    ::testing::Values(TrajectoryCase{0.6, "bump", PenaltyIteration::Picard},
                      TrajectoryCase{0.75, "shifted-bump", PenaltyIteration::Picard},
                      TrajectoryCase{0.9, "two-bumps", PenaltyIteration::Picard},
                      TrajectoryCase{0.75, "bump", PenaltyIteration::Policy}));

// Monotone non-decreasing iterates inside [0, ||phi||], and the penalty term bounded by
// ||(L phi)^+||, for every epsilon of the continuation.
TEST_P(Trajectories, StayInsideTheMonotoneEnvelope) {
  const auto [s, kind, iteration] = GetParam();
  const GridSpec g = GridSpec::line(2.0, 257);
  const ProblemSpec spec = catalog_spec(g, s, kind);
  const DiscreteOperator op(spec);
  const double lphi = lphi_plus_norm(spec, op);
  PenaltyOptions popt;
  popt.iteration = iteration;
  std::optional<ScalarField> warm;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const PenalizationState st = penalized_solve(spec, op, eps, popt, warm ? &*warm : nullptr);
    EXPECT_LE(st.worst_decrease, 1e-10);
    EXPECT_GE(st.min_value, -1e-10);
    EXPECT_LE(st.max_value, spec.obstacle().max_abs() + 1e-10);
    for (std::size_t k = 1; k < st.iterates.size(); ++k)
      EXPECT_GE((st.iterates[k] - st.iterates[k - 1]).min(), -1e-10);
    EXPECT_LE(st.beta_term.max_abs(), lphi + 1e-6) << "eps = " << eps;
    warm = st.solution();
  }
}

TEST(ObstacleSolve, ComplementarityOnTheCatalog) {
  const GridSpec g = GridSpec::line(2.0, 257);
  for (double s : {0.6, 0.75, 0.9})
    for (const char* kind : {"bump", "shifted-bump", "two-bumps"}) {
      const ProblemSpec spec = catalog_spec(g, s, kind);
      const ObstacleSolution sol = obstacle_solve(spec);
      const double bound = std::max(10.0 * 1e-4 * sol.lphi_plus, 1e-4 * spec.obstacle().max_abs());
      EXPECT_LE(sol.comp_residual, bound) << kind << " s = " << s;
      EXPECT_TRUE(sol.converged);
      EXPECT_FALSE(sol.free_boundary.empty());
      // Residual trace shrinks along the schedule.
      EXPECT_LT(sol.comp_trace.back(), sol.comp_trace.front());
    }
}

TEST(ObstacleSolve, NegativeObstacleGivesZero) {
  const GridSpec g = GridSpec::line(2.0, 129);
  const ObstacleSolution sol = obstacle_solve(catalog_spec(g, 0.75, "negative"));
  EXPECT_EQ(sol.u.max_abs(), 0.0);
  EXPECT_TRUE(sol.contact_empty());
  EXPECT_EQ(sol.comp_residual, 0.0);
}

TEST(ObstacleSolve, RejectsBadSchedules) {
  const ProblemSpec spec = catalog_spec(GridSpec::line(2.0, 65), 0.75, "bump");
  ObstacleOptions opt;
  opt.eps_schedule = {1e-2, 1e-1, 1e-4};
  EXPECT_THROW(obstacle_solve(spec, opt), PreconditionError);
  opt.eps_schedule = {1e-1, 1e-2};
  EXPECT_THROW(obstacle_solve(spec, opt), PreconditionError);
}

// Projected Gauss-Seidel is an independent route to the same discrete solution.
TEST(LcpOracle, AgreesWithThePenalizedSolution) {
  const GridSpec g = GridSpec::line(2.0, 65);
  for (double b : {0.0, 0.5})
    for (double s : {0.6, 0.9}) {
      const ProblemSpec spec = catalog_spec(g, s, "bump", b);
      const ObstacleSolution pen = obstacle_solve(spec);
      const ObstacleSolution lcp = lcp_oracle(spec);
      EXPECT_LE(sup_distance(pen.u, lcp.u), 1e-3 * spec.obstacle().max_abs()) << "b = " << b << " s = " << s;
    }
  EXPECT_THROW(lcp_oracle(catalog_spec(GridSpec::line(2.0, 257), 0.75, "bump")), PreconditionError);
}

TEST(ComplementarityPolish, SolvesTheDiscreteSystemExactly) {
  const GridSpec g = GridSpec::line(2.0, 129);
  const ProblemSpec spec = catalog_spec(g, 0.75, "two-bumps");
  const ObstacleSolution pen = obstacle_solve(spec);
  const ObstacleSolution exact = complementarity_polish(spec, pen);
  EXPECT_TRUE(exact.converged);
  EXPECT_LT(exact.comp_residual, 1e-9);
  const ScalarField gap = exact.u - spec.obstacle();
  EXPECT_GE(gap.min(), -1e-12);
  for (int i = 0; i < g.nodes_per_axis(); ++i)
    if (exact.in_contact(i)) EXPECT_EQ(gap[i], 0.0);
  // The penalized solution is within its epsilon-sized error of the exact one.
  EXPECT_LT(sup_distance(exact.u, pen.u), 1e-3);
  // PGS agrees with the polished solution far below the penalization error.
  EXPECT_LT(sup_distance(exact.u, lcp_oracle(spec).u), 1e-8);
}
