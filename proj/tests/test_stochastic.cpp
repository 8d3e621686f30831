#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraclab/obstacle/solve.hpp"
#include "fraclab/stochastic/monte_carlo.hpp"

using namespace fraclab;

class SamplerOrders : public ::testing::TestWithParam<double> {};
INSTANTIATE_TEST_SUITE_P(Orders, SamplerOrders, ::testing::Values(0.6, 0.75, 0.9));

// Empirical characteristic function against exp(-dt |xi|^{2s}); cos has variance <= 1/2.
TEST_P(SamplerOrders, CharacteristicFunctionMatches) {
  const FractionalOrder o(GetParam());
  const double dt = 0.5;
  const StableIncrement inc(o, dt);
  PathRng rng(99, 0);
  const int n = 200'000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = inc(rng);
  for (double xi : {0.5, 1.0, 2.0}) {
    double m = 0.0;
    for (double x : xs) m += std::cos(xi * x);
    m /= n;
    EXPECT_NEAR(m, std::exp(-dt * std::pow(xi, 2.0 * o.s())), 5.0 / std::sqrt(2.0 * n)) << "xi = " << xi;
  }
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  EXPECT_NEAR(xs[n / 2], 0.0, 0.02);
}

TEST(PathRng, StreamsAreReproducibleAndDistinct) {
  PathRng a(1, 7), b(1, 7), c(1, 8);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  PathRng u(3, 0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

namespace {

ProblemSpec bump_spec(int n, double b) {
  const GridSpec g = GridSpec::line(2.0, n);
  return ProblemSpec(FractionalOrder(0.75), CoefficientSpec::constant(g, b, 1.0), obstacles::bump_field(g));
}

}  // namespace

TEST(SimulatePath, DriftOnlyIsTheEulerCharacteristic) {
  const ProblemSpec spec = bump_spec(129, 0.5);
  PathConfig cfg;
  cfg.dt = 1e-2;
  cfg.n_paths = 10'000;
  PathOptions popt;
  popt.jumps = false;
  const Path p = simulate_path(0.2, spec, cfg, 0, popt);
  ASSERT_EQ(p.states.size(), static_cast<std::size_t>(cfg.steps() + 1));
  for (std::size_t k = 0; k < p.states.size(); k += 100) {
    EXPECT_NEAR(p.states[k], 0.2 - 0.5 * p.times[k], 1e-9);
    EXPECT_NEAR(p.discount[k], p.times[k], 1e-9);
  }
}

TEST(SimulatePath, StopsOnceKilled) {
  const ProblemSpec spec = bump_spec(129, 0.0);
  PathConfig cfg;
  cfg.dt = 1e-2;
  cfg.kill_radius = 0.5;
  const Path p = simulate_path(0.0, spec, cfg, 3);
  ASSERT_LT(p.states.size(), static_cast<std::size_t>(cfg.steps() + 1));
  EXPECT_GT(std::abs(p.states.back()), 0.5);
  for (std::size_t k = 0; k + 1 < p.states.size(); ++k) EXPECT_LE(std::abs(p.states[k]), 0.5);
}

TEST(ValueAt, ImmediateStoppingPaysTheObstacleAndNeverPaysNothing) {
  const ProblemSpec spec = bump_spec(129, 0.3);
  const ObstacleSolution sol = obstacle_solve(spec);
  PathConfig cfg;
  cfg.n_paths = 10'000;
  const int node = spec.grid().nearest_index(0.25);
  const MCEstimate now = value_at(node, FixedTimeRule{0.0}, spec, sol, cfg);
  EXPECT_DOUBLE_EQ(now.mean, spec.obstacle()[node]);
  EXPECT_EQ(now.std_error, 0.0);
  const MCEstimate never = value_at(node, NeverRule{}, spec, sol, cfg);
  EXPECT_EQ(never.mean, 0.0);
  EXPECT_EQ(never.n_paths, cfg.n_paths);
}

TEST(ValueAt, RejectsTheContactRuleWithoutContact) {
  const GridSpec g = GridSpec::line(2.0, 129);
  const ProblemSpec spec(FractionalOrder(0.75), CoefficientSpec::constant(g, 0.3, 1.0),
                         obstacles::negative_field(g));
  EXPECT_THROW(value_at(40, ContactSetRule{}, spec, obstacle_solve(spec), PathConfig{}), PreconditionError);
}

TEST(ValueAt, RejectsInvalidPathConfigs) {
  const ProblemSpec spec = bump_spec(129, 0.3);
  const ObstacleSolution sol = obstacle_solve(spec);
  PathConfig short_horizon;
  short_horizon.horizon = 5.0;
  EXPECT_THROW(value_at(64, FixedTimeRule{0.0}, spec, sol, short_horizon), PreconditionError);
  PathConfig few;
  few.n_paths = 100;
  EXPECT_THROW(value_at(64, FixedTimeRule{0.0}, spec, sol, few), PreconditionError);
}

// A coarse-step Monte Carlo run: the contact-set rule recovers u, every alternative stays
// below it, and the estimate does not depend on the thread count.
TEST(ValueAt, ContactRuleRecoversTheSolution) {
  const ProblemSpec spec = bump_spec(257, 0.3);
  const ObstacleSolution sol = complementarity_polish(spec, obstacle_solve(spec));
  PathConfig cfg;
  cfg.dt = 1e-2;
  cfg.n_paths = 20'000;
  cfg.kill_radius = 2.0;
  const int node = spec.grid().nearest_index(-0.9);
  ASSERT_FALSE(sol.in_contact(node));
  const MCEstimate mc = value_at(node, ContactSetRule{}, spec, sol, cfg);
  EXPECT_NEAR(mc.mean, sol.u[node], 4.0 * mc.std_error + 0.05);
  for (const MCEstimate& alt : suboptimality_check(node, default_alternative_rules(-0.9), spec, sol, cfg))
    EXPECT_LE(alt.mean, sol.u[node] + 4.0 * alt.std_error + 0.02) << alt.rule;
  cfg.threads = 3;
  const MCEstimate again = value_at(node, ContactSetRule{}, spec, sol, cfg);
  EXPECT_EQ(again.mean, mc.mean);
  EXPECT_EQ(again.std_error, mc.std_error);
}
