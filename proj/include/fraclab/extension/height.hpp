#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "fraclab/extension/poisson.hpp"
#include "fraclab/obstacle/solve.hpp"
#include "fraclab/op/kernel.hpp"

namespace fraclab {

enum class HeightCorrector {
  // Coefficient -flux_g(O) / 2s of the |y|^{2s} term, with flux_g the trace flux of the
  // extended gap g = u - phi. The resulting v has zero trace flux at the base point, which
  // removes the |y|^{2s} growth that would otherwise dominate near O.
  BaseFluxCancel,
  // Coefficient (1/2s) (-Delta)^s phi(O) from the quadrature operator.
  ObstacleFlux,
};

struct HeightOptions {
  ExtensionOptions extension;
  HeightCorrector corrector = HeightCorrector::BaseFluxCancel;
  // Replace the (penalized) solution by the exact discrete complementarity solution first.
  bool polish = true;
  // Move the origin off the node to the zero of the linear fit of g^{1/(1+s)} over the
  // first three free nodes.
  bool subgrid_origin = false;
};

struct HeightFunction {
  ExtensionField v;
  ObstacleSolution solution;  // the solution actually extended (polished if requested)
  double corrector = 0.0;     // coefficient of |y|^{2s}
  double origin_shift = 0.0;  // origin minus base node coordinate
};

namespace detail {

// Zero of the line through (x, g^{1/(1+s)}) on the three nodes past the base toward the
// free side, kept between the base node and its free neighbour.
inline double subgrid_zero(const ScalarField& gap, int base, int dir, double s) {
  const GridSpec& g = gap.grid();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int step = 1; step <= 3; ++step) {
    const int i = base + dir * step;
    if (i < 0 || i >= g.nodes_per_axis() || gap[i] <= 0.0) break;
    const double x = g.coord(i), y = std::pow(gap[i], 1.0 / (1.0 + s));
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++k;
  }
  if (k < 2) return g.coord(base);
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / k;
  const double zero = -icpt / slope;
  const double lo = std::min(g.coord(base), g.coord(base + dir));
  const double hi = std::max(g.coord(base), g.coord(base + dir));
  return std::clamp(zero, lo, hi);
}

}  // namespace detail

// v = E[u] - E[phi] + corrector |y|^{2s} re-centred at the base point, with E the
// extension (linear, so E[u] - E[phi] = E[u - phi]).
inline HeightFunction height_function(const ObstacleSolution& solution, const ProblemSpec& spec,
                                      int base, const HalfSpaceGrid& hg,
                                      const HeightOptions& opt = {}) {
  const GridSpec& grid = spec.grid();
  require(hg.x() == grid, "half-space grid must sit on the problem grid");
  require(base >= 0 && base < grid.nodes_per_axis(), "base point must be a grid node");
  auto on_free_boundary = [&](const ObstacleSolution& sol) {
    if (!sol.in_contact(base)) return false;
    if (sol.free_boundary.empty()) return true;  // all contact: every contact node qualifies
    return std::find(sol.free_boundary.begin(), sol.free_boundary.end(), base) !=
           sol.free_boundary.end();
  };
  require(on_free_boundary(solution),
          "base node " + std::to_string(base) + " is not on the free boundary; v(O) = 0 would fail");
  ObstacleSolution sol = opt.polish ? complementarity_polish(spec, solution) : solution;
  require(on_free_boundary(sol), "base node " + std::to_string(base) +
                                     " left the free boundary after the complementarity polish");

  const FractionalOrder& order = spec.order();
  const double s = order.s();
  const ScalarField gap = sol.u - spec.obstacle();
  require(gap.min() >= -sol.contact_tol,
          "u - phi dips below -contactTol; the trace of v must be non-negative");

  double origin = grid.coord(base);
  if (opt.subgrid_origin) {
    const int n = grid.nodes_per_axis();
    const bool right_free = base + 1 < n && !sol.in_contact(base + 1);
    const bool left_free = base > 0 && !sol.in_contact(base - 1);
    if (right_free != left_free) origin = detail::subgrid_zero(gap, base, right_free ? 1 : -1, s);
  }

  const ExtensionModel eg = extension_model(gap, order, hg, opt.extension);
  double coef = 0.0;
  if (opt.corrector == HeightCorrector::BaseFluxCancel) {
    coef = -eg.flux(origin) / (2.0 * s);
  } else {
    const KernelTable table(order, grid);
    coef = apply_quadrature(spec.obstacle(), table)[base] / (2.0 * s);
  }
  const double two_s = 2.0 * s;
  ExtensionModel ev;
  ev.value = [eg, coef, two_s](double x, double y) {
    return eg.value(x, y) + coef * std::pow(y, two_s);
  };
  ev.gradient = [eg, coef, two_s](double x, double y) {
    auto d = eg.gradient(x, y);
    d[1] += coef * two_s * std::pow(y, two_s - 1.0);
    return d;
  };
  ev.flux = [eg, coef, two_s](double x) { return eg.flux(x) + coef * two_s; };
  ev.slope = eg.slope;
  if (eg.row)
    ev.row = [eg, coef, two_s](double y) {
      auto r = eg.row(y);
      for (double& x : r) x += coef * std::pow(y, two_s);
      return r;
    };
  HeightFunction out{ExtensionField(hg, order, std::move(ev), origin, base, opt.extension.threads),
                     std::move(sol), coef, origin - grid.coord(base)};
  return out;
}

}  // namespace fraclab
