#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fraclab/core/errors.hpp"

namespace fraclab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
  }
};

// 20-point Gauss-Legendre on [-1, 1].
inline const QuadratureRule& gauss_legendre_20() {
  static const QuadratureRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 20>;
    QuadratureRule r;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t k = 0; k < x.size(); ++k) {
      r.nodes.push_back(-x[k]);
      r.weights.push_back(w[k]);
      r.nodes.push_back(x[k]);
      r.weights.push_back(w[k]);
    }
    return r;
  }();
  return rule;
}

// Composite Gauss-Legendre on [lo, hi] with `panels` equal panels.
inline QuadratureRule composite_gauss(double lo, double hi, int panels) {
  require(panels >= 1 && hi > lo, "composite rule needs a non-empty interval");
  const auto& base = gauss_legendre_20();
  QuadratureRule r;
  const double w = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * w;
    for (std::size_t k = 0; k < base.nodes.size(); ++k) {
      r.nodes.push_back(mid + 0.5 * w * base.nodes[k]);
      r.weights.push_back(0.5 * w * base.weights[k]);
    }
  }
  return r;
}

// Angular rule for  int_0^pi f(theta) |sin theta|^a dtheta,  a in (-1, 0).
// Each quarter is mapped by theta = (pi/2) t^{1/(1+a)}, which clusters nodes at the
// poles and turns the weight into a smooth factor.
class HalfCircleRule {
 public:
  explicit HalfCircleRule(double a, int panels_per_quarter = 4) : a_(a) {
    require(a > -1.0 && a < 0.0, "weight exponent must lie in (-1, 0)");
    const double q = 1.0 / (1.0 + a);
    const double half_pi = 0.5 * std::numbers::pi;
    const QuadratureRule t = composite_gauss(0.0, 1.0, panels_per_quarter);
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      const double tk = t.nodes[k];
      const double theta = half_pi * std::pow(tk, q);
      const double jac = half_pi * q * std::pow(tk, q - 1.0);
      const double w = t.weights[k] * jac * std::pow(std::sin(theta), a);
      theta_.push_back(theta);
      weight_.push_back(w);
      theta_.push_back(std::numbers::pi - theta);
      weight_.push_back(w);
    }
    for (double th : theta_) {
      cos_.push_back(std::cos(th));
      sin_.push_back(std::sin(th));
    }
  }

  double a() const { return a_; }
  std::size_t size() const { return theta_.size(); }
  double theta(std::size_t k) const { return theta_[k]; }
  double weight(std::size_t k) const { return weight_[k]; }
  double cos_theta(std::size_t k) const { return cos_[k]; }
  double sin_theta(std::size_t k) const { return sin_[k]; }

 private:
  double a_;
  std::vector<double> theta_, weight_, cos_, sin_;
};

// int_{dB_r} g |y|^a over the full circle, for g even in y: twice the upper half.
template <class G>
double weighted_surface_integral(const HalfCircleRule& rule, double r, G&& g) {
  require(r > 0.0, "surface integral needs r > 0");
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k)
    acc += rule.weight(k) * g(r * rule.cos_theta(k), r * rule.sin_theta(k));
  return 2.0 * std::pow(r, 1.0 + rule.a()) * acc;
}

// Weighted measure of the unit circle, by the same rule.
inline double weighted_sphere_measure(const HalfCircleRule& rule) {
  return weighted_surface_integral(rule, 1.0, [](double, double) { return 1.0; });
}

// int_{B_r} g |y|^a. Radii rho = r t^{1/(2+a)} make the rho^{1+a} surface growth smooth in t.
template <class G>
double weighted_ball_integral(const HalfCircleRule& rule, double r, G&& g, int radial_panels = 2) {
  require(r > 0.0, "ball integral needs r > 0");
  const double a = rule.a();
  const double p = 1.0 / (2.0 + a);
  const QuadratureRule t = composite_gauss(0.0, 1.0, radial_panels);
  double acc = 0.0;
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    const double rho = r * std::pow(t.nodes[k], p);
    const double jac = r * p * std::pow(t.nodes[k], p - 1.0);
    acc += t.weights[k] * jac * weighted_surface_integral(rule, rho, g);
  }
  return acc;
}

// Radius check shared by grid-backed integrands.
inline void require_radius_within(double r, double extent) {
  require(r > 0.0 && r <= 0.9 * extent,
          "radius " + std::to_string(r) + " exceeds 0.9 x half-plane extent " +
              std::to_string(extent));
}

}  // namespace fraclab
