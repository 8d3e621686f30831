#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fraclab/core/field.hpp"

namespace fraclab {

// Multiplier psi(t) = (2^{1-s}/Gamma(s)) t^s K_s(t) taking a Fourier mode at height y = 0 to
// height y, t = |xi| y. It solves the weighted ODE of the extension with psi(0) = 1 and
// decays at infinity; psi(t) = 1 - c t^{2s} + O(t^2) near 0.
//
// Power series below t = 1, cubic interpolation of log psi and log(-psi') on a fine table
// up to t = 50, and zero beyond (psi(50) < 1e-20).
class PoissonSymbol {
 public:
  explicit PoissonSymbol(const FractionalOrder& order) : s_(order.s()) {
    const double s = s_;
    pre_ = std::pow(2.0, 1.0 - s) / std::tgamma(s);
    // t^s K_s(t) = (pi / (2 sin(s pi))) [2^s A(t) - 2^{-s} t^{2s} B(t)]
    const double lead = pre_ * std::numbers::pi / (2.0 * std::sin(s * std::numbers::pi));
    for (int k = 0; k < kTerms; ++k) {
      const double fk = std::tgamma(k + 1.0);
      a_[k] = lead * std::pow(2.0, s) / (fk * std::tgamma(k + 1.0 - s));
      b_[k] = lead * std::pow(2.0, -s) / (fk * std::tgamma(k + 1.0 + s));
    }
    flux_limit_ = std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(1.0 - s) / std::tgamma(s);
    const int count = static_cast<int>((kTableEnd - kSeriesEnd) / kStep) + 4;
    log_val_.resize(count);
    log_der_.resize(count);
    for (int i = 0; i < count; ++i) {
      const double t = kSeriesEnd + (i - 1) * kStep;
      log_val_[i] = std::log(pre_) + s * std::log(t) + std::log(std::cyl_bessel_k(s, t));
      log_der_[i] = std::log(pre_) + s * std::log(t) + std::log(std::cyl_bessel_k(1.0 - s, t));
    }
  }

  double s() const { return s_; }

  double value(double t) const {
    if (t <= 0.0) return 1.0;
    if (t < kSeriesEnd) {
      const double z = 0.25 * t * t;
      return horner(a_, z) - std::pow(t, 2.0 * s_) * horner(b_, z);
    }
    if (t >= kTableEnd) return 0.0;
    return std::exp(lookup(log_val_, t));
  }

  // psi(t) - 1 without cancellation for small t (the constant series term is exactly 1).
  double excess(double t) const {
    if (t <= 0.0) return 0.0;
    if (t < kSeriesEnd) {
      const double z = 0.25 * t * t;
      double rest = 0.0;
      for (int k = kTerms - 1; k >= 1; --k) rest = rest * z + a_[k];
      return z * rest - std::pow(t, 2.0 * s_) * horner(b_, z);
    }
    return value(t) - 1.0;
  }

  // d psi / dt = -(2^{1-s}/Gamma(s)) t^s K_{1-s}(t)
  double derivative(double t) const {
    require(t > 0.0, "symbol derivative is singular at t = 0");
    if (t < kSeriesEnd) {
      const double z = 0.25 * t * t;
      const double dz = 0.5 * t;
      const double t2s = std::pow(t, 2.0 * s_);
      return horner_derivative(a_, z) * dz -
             (2.0 * s_ * t2s / t * horner(b_, z) + t2s * horner_derivative(b_, z) * dz);
    }
    if (t >= kTableEnd) return 0.0;
    return -std::exp(lookup(log_der_, t));
  }

  // lim_{t -> 0} t^{1-2s} psi'(t) = -kappa, the Dirichlet-to-Neumann constant.
  double flux_constant() const { return flux_limit_; }
  // Coefficient c in psi(t) = 1 - c t^{2s} + ...
  double leading_coefficient() const { return flux_limit_ / (2.0 * s_); }

 private:
  static constexpr int kTerms = 18;
  static constexpr double kSeriesEnd = 1.0;
  static constexpr double kTableEnd = 50.0;
  static constexpr double kStep = 1.0 / 256.0;

  static double horner(const double (&c)[kTerms], double z) {
    double acc = 0.0;
    for (int k = kTerms - 1; k >= 0; --k) acc = acc * z + c[k];
    return acc;
  }
  static double horner_derivative(const double (&c)[kTerms], double z) {
    double acc = 0.0;
    for (int k = kTerms - 1; k >= 1; --k) acc = acc * z + k * c[k];
    return acc;
  }
  // Four-point Lagrange interpolation on the uniform table (node i sits at kSeriesEnd + (i-1) step).
  static double lookup(const std::vector<double>& tab, double t) {
    const double u = (t - kSeriesEnd) / kStep;
    const int i = static_cast<int>(u);
    const double f = u - i;
    const double* p = &tab[i];
    const double l0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double l1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double l2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double l3 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return l0 * p[0] + l1 * p[1] + l2 * p[2] + l3 * p[3];
  }

  double s_;
  double pre_ = 0.0;
  double a_[kTerms]{};
  double b_[kTerms]{};
  double flux_limit_ = 0.0;
  std::vector<double> log_val_;
  std::vector<double> log_der_;
};

}  // namespace fraclab
