#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "fraclab/core/quadrature.hpp"
#include "fraclab/extension/half_space.hpp"

namespace fraclab {

// p in [s, alpha + s - 1/2), alpha in (2s - 1, s), gamma = 2 (alpha + s - p) - 1 > 0.
class FrequencyParams {
 public:
  FrequencyParams(const FractionalOrder& order, double p, double alpha, double r_max,
                  double c_mono = 0.0)
      : s_(order.s()), a_(order.a()), p_(p), alpha_(alpha), r_max_(r_max), c_mono_(c_mono) {
    require(alpha > 2.0 * s_ - 1.0 && alpha < s_, "alpha must lie in (2s - 1, s)");
    require(p >= s_, "p must be at least s");
    require(p < alpha + s_ - 0.5, "p must stay below alpha + s - 1/2 (gamma > 0)");
    require(r_max > 0.0, "rMax must be positive");
    require(c_mono >= 0.0, "monotonicity constant must be non-negative");
  }

  // p = s and alpha at the middle of (max(2s - 1, 1/2), s): the lower end is raised to 1/2
  // because gamma = 2 alpha - 1 must stay positive when p = s.
  static FrequencyParams defaults(const FractionalOrder& order, double r_max) {
    const double s = order.s();
    return FrequencyParams(order, s, 0.5 * (std::max(2.0 * s - 1.0, 0.5) + s), r_max);
  }

  double s() const { return s_; }
  double a() const { return a_; }
  double p() const { return p_; }
  double alpha() const { return alpha_; }
  double gamma() const { return 2.0 * (alpha_ + s_ - p_) - 1.0; }
  double r_max() const { return r_max_; }
  double c_mono() const { return c_mono_; }
  // n + a + 2(1 + p), the exponent of the truncation r^{...} in Phi.
  double truncation_exponent(int dim = 1) const { return dim + a_ + 2.0 * (1.0 + p_); }

 private:
  double s_, a_, p_, alpha_, r_max_, c_mono_;
};

// r_k = r_max rho^k down to r_min (inclusive), largest first.
inline std::vector<double> geometric_radii(double r_max, double r_min, double rho = 0.9) {
  require(r_max > r_min && r_min > 0.0 && rho > 0.0 && rho < 1.0, "bad geometric radius range");
  std::vector<double> r;
  for (double x = r_max; x >= r_min * (1.0 - 1e-12); x *= rho) r.push_back(x);
  return r;
}

namespace detail {
template <class F>
void parallel_for(int count, int threads, F&& body) {
  if (threads <= 1 || count < 2) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int k = t; k < count; k += threads) body(k);
    });
  for (auto& th : pool) th.join();
}
}  // namespace detail

// F(r) = int_{dB_r} v^2 |y|^a.
inline std::vector<double> frequency_F(const ExtensionField& v, const std::vector<double>& radii,
                                       const HalfCircleRule& rule, int threads = 1) {
  for (double r : radii) require_radius_within(r, v.radius_limit());
  std::vector<double> F(radii.size());
  detail::parallel_for(static_cast<int>(radii.size()), threads, [&](int k) {
    F[k] = weighted_surface_integral(rule, radii[k], [&](double x, double y) {
      const double w = v.value(x, y);
      return w * w;
    });
  });
  return F;
}

struct PhiValues {
  std::vector<double> Phi;
  std::vector<char> trunc_active;  // r^{n+a+2(1+p)} exceeded F
  std::vector<char> degenerate;    // F == 0
};

// Phi = d log max(F, r^e) / d log r, e = n + a + 2(1 + p), by three-point differences in
// log r (central inside, one-sided at the ends; exact for pure powers on any spacing).
inline PhiValues frequency_phi(const std::vector<double>& F, const std::vector<double>& radii,
                               const FrequencyParams& params, int dim = 1) {
  const std::size_t n = radii.size();
  require(F.size() == n && n >= 3, "Phi needs F on at least three radii");
  const double e = params.truncation_exponent(dim);
  PhiValues out;
  std::vector<double> lg(n), lr(n);
  for (std::size_t k = 0; k < n; ++k) {
    require(F[k] >= 0.0 && std::isfinite(F[k]), "F must be finite and non-negative");
    const double trunc = std::pow(radii[k], e);
    out.trunc_active.push_back(F[k] < trunc);
    out.degenerate.push_back(F[k] == 0.0);
    lg[k] = std::log(std::max(F[k], trunc));
    lr[k] = std::log(radii[k]);
  }
  auto deriv = [&](std::size_t i0, std::size_t i1, std::size_t i2, std::size_t at) {
    // derivative at lr[at] of the quadratic through the three points
    const double x0 = lr[i0], x1 = lr[i1], x2 = lr[i2], x = lr[at];
    const double d0 = (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
    const double d1 = (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
    const double d2 = (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    return d0 * lg[i0] + d1 * lg[i1] + d2 * lg[i2];
  };
  out.Phi.resize(n);
  out.Phi[0] = deriv(0, 1, 2, 0);
  for (std::size_t k = 1; k + 1 < n; ++k) out.Phi[k] = deriv(k - 1, k, k + 1, k);
  out.Phi[n - 1] = deriv(n - 3, n - 2, n - 1, n - 1);
  return out;
}

struct FrequencyCurve {
  std::vector<double> radii;
  std::vector<double> F;
  std::vector<double> Phi;
  std::vector<double> dr;
  std::vector<char> trunc_active;
  std::vector<char> degenerate;
  double origin_value = 0.0;  // v(O)
  double a = 0.0;
};

// d_r = (r^{-(n+a)} F(r))^{1/2}
inline double rescale_factor(double F, double r, double a, int dim = 1) {
  return std::sqrt(std::pow(r, -(dim + a)) * F);
}

inline FrequencyCurve frequency_curve(const ExtensionField& v, const std::vector<double>& radii,
                                      const FrequencyParams& params, int panels_per_quarter = 8,
                                      int threads = 1) {
  const HalfCircleRule rule(v.order().a(), panels_per_quarter);
  FrequencyCurve c;
  c.radii = radii;
  c.a = v.order().a();
  c.F = frequency_F(v, radii, rule, threads);
  PhiValues pv = frequency_phi(c.F, radii, params);
  c.Phi = std::move(pv.Phi);
  c.trunc_active = std::move(pv.trunc_active);
  c.degenerate = std::move(pv.degenerate);
  for (std::size_t k = 0; k < radii.size(); ++k) c.dr.push_back(rescale_factor(c.F[k], radii[k], c.a));
  c.origin_value = v.value(0.0, 0.0);
  return c;
}

struct MonotonicityReport {
  bool passed = false;
  double C = 0.0;               // smallest admissible constant (meaningful when passed)
  double worst_decrease = 0.0;  // largest relative drop of Phi itself between neighbours
  double bad_r_lo = 0.0, bad_r_hi = 0.0;  // offending pair when failed
};

// Smallest C >= 0 such that e^{C r^gamma} Phi(r) is non-decreasing in r up to
// slack * |e^{C r^gamma} Phi| on consecutive radii. Each pair gives an interval of
// admissible C in closed form; the answer is the left end of their intersection.
inline MonotonicityReport monotonicity_check(const std::vector<double>& radii,
                                             const std::vector<double>& Phi,
                                             const FrequencyParams& params, double c_cap = 100.0,
                                             double slack = 1e-3) {
  require(radii.size() == Phi.size() && radii.size() >= 2, "need Phi on at least two radii");
  std::vector<std::size_t> idx(radii.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return radii[i] < radii[j]; });
  const double g = params.gamma();
  double lo = 0.0, hi = c_cap;
  MonotonicityReport rep;
  std::pair<double, double> lo_pair{0, 0}, hi_pair{0, 0};
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double r0 = radii[idx[k]], r1 = radii[idx[k + 1]];
    const double p0 = Phi[idx[k]], p1 = Phi[idx[k + 1]];
    const double drop = (p0 - p1) / std::max(std::abs(p0), 1e-300);
    rep.worst_decrease = std::max(rep.worst_decrease, drop);
    // need e^{C D} p1 >= T with D > 0, T = p0 - slack |p0|
    const double D = std::pow(r1, g) - std::pow(r0, g);
    const double T = p0 - slack * std::abs(p0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double need_lo = 0.0, need_hi = inf;
    if (p1 > 0.0) {
      if (T > p1) need_lo = std::log(T / p1) / D;
    } else if (p1 == 0.0) {
      if (T > 0.0) need_lo = inf;
    } else {
      need_hi = T < 0.0 ? std::log(T / p1) / D : -inf;
    }
    if (need_lo > lo) lo = need_lo, lo_pair = {r0, r1};
    if (need_hi < hi) hi = need_hi, hi_pair = {r0, r1};
  }
  rep.passed = lo <= hi;
  rep.C = lo;
  if (!rep.passed) std::tie(rep.bad_r_lo, rep.bad_r_hi) = lo > c_cap ? lo_pair : hi_pair;
  return rep;
}

inline MonotonicityReport monotonicity_check(const FrequencyCurve& c, const FrequencyParams& params,
                                             double c_cap = 100.0, double slack = 1e-3) {
  return monotonicity_check(c.radii, c.Phi, params, c_cap, slack);
}

struct Rescaling {
  double d_r = 0.0;
  std::function<double(double, double)> v_r;  // v(r x, r y) / d_r on the unit ball
  double normalization = 0.0;                 // int_{dB_1} v_r^2 |y|^a
};

inline Rescaling rescale(const ExtensionField& v, double r, int panels_per_quarter = 8) {
  const HalfCircleRule rule(v.order().a(), panels_per_quarter);
  const double F = frequency_F(v, {r}, rule)[0];
  require(F > 0.0, "F(r) = 0: the rescaling is undefined");
  Rescaling out;
  out.d_r = rescale_factor(F, r, v.order().a());
  const double d = out.d_r;
  out.v_r = [model = v.model(), o = v.origin(), r, d](double x, double y) {
    return model.value(o + r * x, std::abs(r * y)) / d;
  };
  out.normalization = weighted_surface_integral(rule, 1.0, [&](double x, double y) {
    const double w = out.v_r(x, y);
    return w * w;
  });
  return out;
}

enum class FrequencyBranch { Degenerate, ContactRate, Growth };

struct FrequencyLimit {
  FrequencyBranch branch = FrequencyBranch::Degenerate;
  double phi0 = 0.0;           // extrapolated Phi(0+)
  double expected = 0.0;       // n+a+2(1+p) on the contact-rate branch, n+a+2(1+s) lower bound otherwise
  double ratio_slope = 0.0;    // d log(d_r / r^{1+p}) / d log r over the fitted radii
  std::vector<double> fit_radii;
};

// Fits Phi = A + B r^gamma on the five smallest reliable radii (F > 0) and reports A.
// The branch follows the trend of d_r / r^{1+p}: bounded as r -> 0 (slope >= -0.1 in
// log-log) is the contact-rate branch, growing is the other one.
inline FrequencyLimit frequency_limit(const FrequencyCurve& c, const FractionalOrder& order,
                                      const FrequencyParams& params, int dim = 1) {
  FrequencyLimit out;
  // v(O) must be negligible against the size of v on the sampled spheres.
  const double scale = c.dr.empty() ? 0.0 : *std::max_element(c.dr.begin(), c.dr.end());
  if (!(std::abs(c.origin_value) <= 1e-3 * scale)) return out;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < c.radii.size(); ++k)
    if (!c.degenerate[k] && c.F[k] > 0.0) idx.push_back(k);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return c.radii[i] < c.radii[j]; });
  if (idx.size() < 5)
    throw PreconditionError("frequency limit needs at least 5 reliable radii, got " +
                            std::to_string(idx.size()));
  idx.resize(5);
  const double g = params.gamma();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, lx = 0, ly = 0, lxx = 0, lxy = 0;
  for (auto k : idx) {
    const double x = std::pow(c.radii[k], g), y = c.Phi[k];
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    const double u = std::log(c.radii[k]), w = std::log(c.dr[k]) - (1.0 + params.p()) * u;
    lx += u, ly += w, lxx += u * u, lxy += u * w;
    out.fit_radii.push_back(c.radii[k]);
  }
  const double m = 5.0;
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  out.phi0 = (sy - slope * sx) / m;
  out.ratio_slope = (m * lxy - lx * ly) / (m * lxx - lx * lx);
  const double a = order.a();
  if (out.ratio_slope >= -0.1) {
    out.branch = FrequencyBranch::ContactRate;
    out.expected = dim + a + 2.0 * (1.0 + params.p());
  } else {
    out.branch = FrequencyBranch::Growth;
    out.expected = dim + a + 2.0 * (1.0 + order.s());
  }
  return out;
}

}  // namespace fraclab
