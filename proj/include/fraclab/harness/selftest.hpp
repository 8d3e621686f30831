#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fraclab/extension/diagnostics.hpp"
#include "fraclab/extension/frequency.hpp"
#include "fraclab/extension/poisson.hpp"
#include "fraclab/harness/run.hpp"
#include "fraclab/linear/solver.hpp"
#include "fraclab/op/kernel.hpp"
#include "fraclab/op/normalization.hpp"
#include "fraclab/op/spectral.hpp"
#include "fraclab/stochastic/monte_carlo.hpp"

namespace fraclab::harness {

// Cheap closed-form cases, one per library guarantee that follows from construction alone.
struct SelfTestCase {
  std::string name;
  std::function<bool()> run;
};

namespace detail {

inline ExtensionField synthetic_field(const FractionalOrder& o, std::function<double(double, double)> f) {
  ExtensionModel m;
  m.value = std::move(f);
  return ExtensionField(HalfSpaceGrid(GridSpec::line(2.0, 33), o, 1.0, 8), o, std::move(m));
}

inline bool throws_precondition(const std::function<void()>& f) {
  try {
    f();
  } catch (const PreconditionError&) {
    return true;
  }
  return false;
}

}  // namespace detail

inline std::vector<SelfTestCase> selftest_cases(const std::filesystem::path& scratch) {
  using std::abs;
  const FractionalOrder o(0.75);
  const GridSpec g = GridSpec::line(8.0, 129);
  std::vector<SelfTestCase> cs;
  auto add = [&](std::string name, std::function<bool()> f) { cs.push_back({std::move(name), std::move(f)}); };

  add("gradient of a constant is zero", [=] {
    return gradient(ScalarField::sample(g, [](double) { return 5.0; }))[0].max_abs() == 0.0;
  });
  add("gradient of x^2 at 0.5 is 1", [] {
    const GridSpec gg(1, 1.6, 33);  // h = 0.1
    const ScalarField d = gradient(ScalarField::sample(gg, [](double x) { return x * x; }))[0];
    return abs(d[gg.nearest_index(0.5)] - 1.0) < 1e-12;
  });
  add("normalization constant is positive", [] {
    for (double s : {0.55, 0.75, 0.95})
      if (!(normalization_constant(FractionalOrder(s)) > 0.0)) return false;
    return true;
  });
  add("quadrature operator annihilates constants", [=] {
    const ScalarField one = ScalarField::sample(g, [](double) { return 1.0; });
    // The constant continues outside the box, so every difference vanishes.
    const ScalarField out = apply_quadrature(one, KernelTable(o, g), 1.0);
    const double worst = out.max_abs();
    return worst < 1e-12;
  });
  add("spectral operator maps cos to |xi|^{2s} cos", [=] {
    const double xi = std::numbers::pi * 3.0 / g.half_width();
    const ScalarField u = ScalarField::sample(g, [=](double x) { return std::cos(xi * x); });
    const ScalarField out = apply_spectral(u, o);
    const double lam = std::pow(xi, 2.0 * o.s());
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, abs(out[i] - lam * u[i]));
    return worst < 1e-10 * lam;
  });
  add("model solve inverts its symbol on a grid mode", [=] {
    const double xi = std::numbers::pi * 2.0 / g.half_width();
    const double lam = std::pow(xi, 2.0 * o.s()) + 1.0;
    const ScalarField f = ScalarField::sample(g, [=](double x) { return lam * std::cos(xi * x); });
    const ScalarField u = solve_model(f, 1.0, o);
    return sup_distance(u, ScalarField::sample(g, [=](double x) { return std::cos(xi * x); })) < 1e-12;
  });
  add("comparison check on u = 0 and u = 1", [=] {
    return comparison_check(ScalarField(g)) == 0.0 &&
           comparison_check(ScalarField::sample(g, [](double) { return 1.0; })) == 1.0;
  });
  add("penalty term vanishes for t <= 0", [] { return beta_eps(-3.0, 0.1) == 0.0 && beta_eps(0.0, 0.1) == 0.0; });
  add("negative obstacle gives u = 0 with empty contact set", [=] {
    const GridSpec gg = GridSpec::line(8.0, 65);
    const ProblemSpec spec(o, CoefficientSpec::constant(gg, 0.0, 1.0), obstacles::negative_field(gg));
    const ObstacleSolution sol = obstacle_solve(spec);
    return sol.u.max_abs() == 0.0 && sol.contact_empty() && sol.comp_residual == 0.0;
  });
  add("order s = 0.5 is rejected", [] { return detail::throws_precondition([] { FractionalOrder(0.5); }); });
  add("drift-only path moves by -b t", [=] {
    const GridSpec gg = GridSpec::line(8.0, 65);
    const ProblemSpec spec(o, CoefficientSpec::constant(gg, 0.3, 1.0), obstacles::bump_field(gg));
    PathConfig cfg;
    const Path p = simulate_path(0.5, spec, cfg, 0, PathOptions{false});
    const std::size_t k = p.states.size() - 1;
    return abs(p.states[k] - (0.5 - 0.3 * p.times[k])) < 1e-9 && abs(p.discount[k] - p.times[k]) < 1e-9;
  });
  add("stopping at once inside the contact set pays phi", [=] {
    const GridSpec gg = GridSpec::line(8.0, 65);
    const ProblemSpec spec(o, CoefficientSpec::constant(gg, 0.0, 1.0), obstacles::bump_field(gg));
    ObstacleSolution sol(gg);
    sol.u = spec.obstacle();
    sol.contact.assign(gg.nodes_per_axis(), 1);
    PathConfig cfg;
    cfg.n_paths = 10'000;
    const int c = gg.center_index();
    const MCEstimate e = value_at(c, ContactSetRule{}, spec, sol, cfg);
    return e.mean == spec.obstacle()[c] && e.std_error == 0.0;
  });
  add("extension of zero is zero", [=] {
    const ExtensionField v = poisson_extend(ScalarField(g), o, HalfSpaceGrid::over(g, o, 8));
    double worst = 0.0;
    for (int j = 0; j <= 8; ++j)
      for (int i = 0; i < g.nodes_per_axis(); ++i) worst = std::max(worst, abs(v.at(i, j)));
    return worst == 0.0;
  });
  add("F of v = 1 is omega r^{1+a}", [=] {
    const ExtensionField v = detail::synthetic_field(o, [](double, double) { return 1.0; });
    const HalfCircleRule rule(o.a(), 8);
    const double omega = weighted_sphere_measure(rule);
    const auto F = frequency_F(v, {0.1, 0.5}, rule);
    return abs(F[0] - omega * std::pow(0.1, 1 + o.a())) < 1e-12 && abs(F[1] - omega * std::pow(0.5, 1 + o.a())) < 1e-12;
  });
  add("Phi of a degree-1 field is n + a + 2", [=] {
    const ExtensionField v = detail::synthetic_field(o, [](double x, double y) { return std::hypot(x, y); });
    const FrequencyParams p = FrequencyParams::defaults(o, 0.5);
    const auto radii = geometric_radii(0.5, 0.05);
    const FrequencyCurve c = frequency_curve(v, radii, p);
    for (double phi : c.Phi)
      if (abs(phi - (3.0 + o.a())) > 1e-3) return false;
    return monotonicity_check(c, p).C == 0.0;
  });
  add("v = 1 is classified degenerate", [=] {
    const ExtensionField v = detail::synthetic_field(o, [](double, double) { return 1.0; });
    const FrequencyParams p = FrequencyParams::defaults(o, 0.5);
    const FrequencyCurve c = frequency_curve(v, geometric_radii(0.5, 0.05), p);
    return frequency_limit(c, o, p).branch == FrequencyBranch::Degenerate;
  });
  add("Rellich residual of a constant is zero", [=] {
    ExtensionModel m;
    m.value = [](double, double) { return 2.0; };
    m.gradient = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    m.flux = [](double) { return 0.0; };
    m.slope = [](double) { return 0.0; };
    const ExtensionField v(HalfSpaceGrid(GridSpec::line(2.0, 33), o, 1.0, 8), o, m);
    return rellich_residual(v, 0.5).residual == 0.0;
  });
  add("boundary mean of zero passes by the floor", [=] {
    const ExtensionField v = detail::synthetic_field(o, [](double, double) { return 0.0; });
    return boundary_mean_check(v, {0.1, 0.2, 0.4}, o, 0.6).passed;
  });
  add("growth fit of |x|^{1+s} returns 1+s", [=] {
    const GridSpec gg = GridSpec::line(1.0, 257);
    const ScalarField gap = ScalarField::sample(gg, [&](double x) { return std::pow(abs(x), 1.0 + o.s()); });
    return abs(growth_exponent_fit(gap, gg.center_index(), cell_radii(gg.spacing())).exponent - 1.75) < 1e-6;
  });
  add("negative scenario passes and reruns byte-identically", [=] {
    Scenario sc;
    sc.name = "selftest-negative";
    sc.problem.n = 257;
    sc.problem.obstacle.kind = "negative";
    sc.mc.n_paths = 10'000;
    sc.mc.probes = {-0.5, 0.5};
    RunOptions opt;
    opt.out = scratch;
    opt.quiet = true;
    const RunResult a = run_scenario(sc, opt);
    auto slurp = [&](const char* f) {
      std::ifstream in(a.dir / f, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string trace = slurp("trace.csv"), mc = slurp("mc.csv");
    const RunResult b = run_scenario(sc, opt);
    return a.all_passed && b.all_passed && trace == slurp("trace.csv") && mc == slurp("mc.csv") &&
           make_report(a.dir).all_passed;
  });
  add("report on an empty directory fails with no record", [=] {
    const auto empty = scratch / "empty";
    std::filesystem::create_directories(empty);
    try {
      make_report(empty);
    } catch (const std::runtime_error& e) {
      return std::string(e.what()).find("no record") != std::string::npos;
    }
    return false;
  });
  add("config round-trips through its canonical form", [] {
    Scenario sc;
    sc.name = "roundtrip";
    const std::string once = canonical_dump(sc);
    return canonical_dump(scenario_from_json(json::parse(once))) == once;
  });
  return cs;
}

}  // namespace fraclab::harness
