#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numeric>
#include <vector>

#include "fraclab/extension/half_space.hpp"
#include "fraclab/extension/symbol.hpp"
#include "fraclab/op/spectral.hpp"

namespace fraclab {

namespace detail {
// Least-squares intercept alpha of rhs = alpha + beta col over three points.
inline double fit_intercept(const double (&col)[3], const double (&rhs)[3]) {
  const double mc = (col[0] + col[1] + col[2]) / 3.0, mr = (rhs[0] + rhs[1] + rhs[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int k = 0; k < 3; ++k) {
    sxy += (col[k] - mc) * (rhs[k] - mr);
    sxx += (col[k] - mc) * (col[k] - mc);
  }
  return mr - sxy / sxx * mc;
}
}  // namespace detail

// Extension of g solving div(|y|^a grad v) = 0, v(x, 0) = g, bounded as y -> infinity.
// Each Fourier mode of the zero-padded periodic box is damped by psi(|xi| y). Values at
// y = 0 are the trigonometric interpolant of g, exact at the nodes.
class FourierExtension {
 public:
  FourierExtension(const ScalarField& g, const FractionalOrder& order, int padding = 2)
      : psi_(order), box_(g.grid(), padding), two_s_(2.0 * order.s()) {
    c_ = box_.coefficients(g);
    const double h = g.grid().spacing();
    left_ = -g.grid().half_width() - box_.offset() * h;
    N_ = box_.length();
  }

  const PeriodicBox& box() const { return box_; }
  const PoissonSymbol& symbol() const { return psi_; }

  double value(double x, double y) const {
    return sum(x, [&](double xi, std::complex<double> c, std::complex<double> e) {
      const double damp = y > 0.0 ? psi_.value(xi * y) : 1.0;
      return damp * (c * e).real();
    }, y);
  }

  std::array<double, 2> gradient(double x, double y) const {
    require(y > 0.0, "extension gradient is taken off the trace");
    const double vx = sum(x, [&](double xi, std::complex<double> c, std::complex<double> e) {
      return -xi * psi_.value(xi * y) * (c * e).imag();
    }, y);
    const double vy = sum(x, [&](double xi, std::complex<double> c, std::complex<double> e) {
      return xi == 0.0 ? 0.0 : xi * psi_.derivative(xi * y) * (c * e).real();
    }, y);
    return {vx, vy};
  }

  // lim y^a v_y = -kappa (-Delta)^s g with kappa the symbol's flux constant.
  double flux(double x) const {
    const double kappa = psi_.flux_constant();
    return sum(x, [&](double xi, std::complex<double> c, std::complex<double> e) {
      return xi == 0.0 ? 0.0 : -kappa * std::pow(xi, two_s_) * (c * e).real();
    }, 0.0);
  }

  double slope(double x) const {
    return sum(x, [&](double xi, std::complex<double> c, std::complex<double> e) {
      return -xi * (c * e).imag();
    }, 0.0);
  }

  // Whole row at height y on the grid nodes, by one inverse transform.
  std::vector<double> row(double y) const {
    std::vector<std::complex<double>> c = c_;
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] *= y > 0.0 ? psi_.value(box_.wavenumber(static_cast<int>(k)) * y) : 1.0;
    return box_.synthesize(std::move(c)).values();
  }

  // v(., y) - v(., 0) on the grid nodes, formed mode by mode so that tiny y keep full
  // relative precision.
  std::vector<double> row_rise(double y) const {
    std::vector<std::complex<double>> c = c_;
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] *= psi_.excess(box_.wavenumber(static_cast<int>(k)) * y);
    return box_.synthesize(std::move(c)).values();
  }

  ExtensionModel model() const {
    auto self = std::make_shared<FourierExtension>(*this);
    return {[self](double x, double y) { return self->value(x, y); },
            [self](double x, double y) { return self->gradient(x, y); },
            [self](double x) { return self->flux(x); },
            [self](double x) { return self->slope(x); },
            [self](double y) { return self->row(y); }};
  }

 private:
  // (1/N) sum over modes of term(xi_k, c_k, e^{i xi_k (x - left)}), with the conjugate
  // half folded in (weight 2) and the Nyquist mode counted once. Modes with xi y beyond
  // the symbol's cutoff contribute nothing and end the loop.
  template <class Term>
  double sum(double x, Term&& term, double y) const {
    const int K = N_ / 2;
    const double dxi = box_.wavenumber(1);
    const double t = x - left_;
    const std::complex<double> step(std::cos(dxi * t), std::sin(dxi * t));
    std::complex<double> rot(1.0, 0.0);
    double acc = term(0.0, c_[0], rot);
    for (int k = 1; k <= K; ++k) {
      const double xi = k * dxi;
      if (y > 0.0 && xi * y >= 50.0) break;
      rot *= step;
      if (k % 64 == 0) rot = std::polar(1.0, xi * t);  // curb drift of the recurrence
      acc += (k == K ? 1.0 : 2.0) * term(xi, c_[k], rot);
    }
    return acc / N_;
  }

  PoissonSymbol psi_;
  PeriodicBox box_;
  double two_s_;
  std::vector<std::complex<double>> c_;
  double left_ = 0.0;
  int N_ = 0;
};

// Direct sum with the Poisson kernel y^{2s} / (|x - x_i|^2 + y^2)^{(1+2s)/2}, normalized per
// evaluation point so that constants are reproduced exactly. The trace flux is fitted from
// the three lowest grid rows.
class KernelSumExtension {
 public:
  KernelSumExtension(const ScalarField& g, const FractionalOrder& order, const HalfSpaceGrid& hg)
      : g_(g), exponent_(0.5 * (1.0 + 2.0 * order.s())), two_s_(2.0 * order.s()) {
    require(hg.x() == g.grid(), "trace and half-space grid disagree");
    const double h = g.grid().spacing();
    require(hg.y(1) >= 0.1 * h,
            "lowest row y1 = " + std::to_string(hg.y(1)) +
                " is below h/10; the kernel sum is under-resolved there (raise y1 or refine x)");
    for (int j = 1; j <= 3; ++j) fit_rows_[j - 1] = hg.y(j);
  }

  double value(double x, double y) const {
    if (y <= 0.0) return g_.interpolate(x);
    double num = 0.0, den = 0.0;
    const GridSpec& gr = g_.grid();
    for (int i = 0; i < gr.nodes_per_axis(); ++i) {
      const double d = x - gr.coord(i);
      const double w = std::pow(d * d + y * y, -exponent_);
      num += w * g_[i];
      den += w;
    }
    return num / den;
  }

  std::array<double, 2> gradient(double x, double y) const {
    require(y > 0.0, "extension gradient is taken off the trace");
    double num = 0.0, den = 0.0, nx = 0.0, dx = 0.0, ny = 0.0, dy = 0.0;
    const GridSpec& gr = g_.grid();
    for (int i = 0; i < gr.nodes_per_axis(); ++i) {
      const double d = x - gr.coord(i);
      const double q = d * d + y * y;
      const double w = std::pow(q, -exponent_);
      const double wx = -2.0 * exponent_ * d / q * w;
      const double wy = -2.0 * exponent_ * y / q * w;
      num += w * g_[i];
      den += w;
      nx += wx * g_[i];
      dx += wx;
      ny += wy * g_[i];
      dy += wy;
    }
    const double v = num / den;
    return {(nx - v * dx) / den, (ny - v * dy) / den};
  }

  // Slope of the piecewise-linear trace.
  double slope(double x) const {
    const GridSpec& gr = g_.grid();
    const double h = gr.spacing();
    const int i = std::clamp(static_cast<int>(std::floor((x + gr.half_width()) / h)), 0,
                             gr.nodes_per_axis() - 2);
    return (g_[i + 1] - g_[i]) / h;
  }

  // v(x, y) - v(x, 0) = (flux / 2s) y^{2s} + beta y^2 + ..., fitted on three rows.
  double flux(double x) const {
    const double g0 = value(x, 0.0);
    double rhs[3], col[3];
    for (int k = 0; k < 3; ++k) {
      const double y = fit_rows_[k];
      rhs[k] = (value(x, y) - g0) / std::pow(y, two_s_);
      col[k] = std::pow(y, 2.0 - two_s_);
    }
    return two_s_ * detail::fit_intercept(col, rhs);
  }

  ExtensionModel model() const {
    auto self = std::make_shared<KernelSumExtension>(*this);
    return {[self](double x, double y) { return self->value(x, y); },
            [self](double x, double y) { return self->gradient(x, y); },
            [self](double x) { return self->flux(x); },
            [self](double x) { return self->slope(x); },
            {}};
  }

 private:
  ScalarField g_;
  double exponent_;
  double two_s_;
  double fit_rows_[3]{};
};

enum class ExtensionMethod { Fourier, KernelSum };

struct ExtensionOptions {
  ExtensionMethod method = ExtensionMethod::Fourier;
  int padding = 2;
  int threads = 1;
};

inline ExtensionModel extension_model(const ScalarField& g, const FractionalOrder& order,
                                      const HalfSpaceGrid& hg, const ExtensionOptions& opt = {}) {
  require(hg.x() == g.grid(), "trace and half-space grid disagree");
  if (opt.method == ExtensionMethod::KernelSum) return KernelSumExtension(g, order, hg).model();
  return FourierExtension(g, order, opt.padding).model();
}

inline ExtensionField poisson_extend(const ScalarField& g, const FractionalOrder& order,
                                     const HalfSpaceGrid& hg, const ExtensionOptions& opt = {}) {
  return ExtensionField(hg, order, extension_model(g, order, hg, opt), 0.0, -1, opt.threads);
}

struct DtnReport {
  bool degenerate = false;
  double kappa = 0.0;        // fitted flux = -kappa (-Delta)^s g
  double residual = 0.0;     // ||flux - kappa t||_2 / ||flux||_2
  double correlation = 0.0;  // Pearson correlation of flux with t = -(-Delta)^s g
  int samples = 0;
};

// Measures lim y^a v_y from the three lowest rows of the extension
// and regresses it through the origin on -(-Delta)^s g over the middle 80% of the box.
inline DtnReport dtn_check(const ScalarField& g, const FractionalOrder& order,
                           const HalfSpaceGrid& hg, const ExtensionOptions& opt = {}) {
  require(hg.x() == g.grid(), "trace and half-space grid disagree");
  // rise[k][i] = v(x_i, y_{k+1}) - g(x_i)
  std::vector<std::vector<double>> rise(3);
  if (opt.method == ExtensionMethod::Fourier) {
    const FourierExtension ext(g, order, opt.padding);
    for (int k = 0; k < 3; ++k) rise[k] = ext.row_rise(hg.y(k + 1));
  } else {
    const KernelSumExtension ext(g, order, hg);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < g.grid().nodes_per_axis(); ++i)
        rise[k].push_back(ext.value(g.grid().coord(i), hg.y(k + 1)) - g[i]);
  }
  const ScalarField target = -1.0 * apply_spectral(g, order, opt.padding);
  const int n = g.grid().nodes_per_axis();
  const double two_s = 2.0 * order.s();
  DtnReport rep;
  if (target.max_abs() <= 1e-12 * std::max(1.0, g.max_abs())) {
    rep.degenerate = true;
    return rep;
  }
  std::vector<double> f, t;
  for (int i = n / 10; i < n - n / 10; ++i) {
    double col[3], rhs[3];
    for (int k = 0; k < 3; ++k) {
      const double y = hg.y(k + 1);
      rhs[k] = rise[k][i] / std::pow(y, two_s);
      col[k] = std::pow(y, 2.0 - two_s);
    }
    f.push_back(two_s * detail::fit_intercept(col, rhs));
    t.push_back(target[i]);
  }
  const double ft = std::inner_product(f.begin(), f.end(), t.begin(), 0.0);
  const double tt = std::inner_product(t.begin(), t.end(), t.begin(), 0.0);
  const double ff = std::inner_product(f.begin(), f.end(), f.begin(), 0.0);
  rep.samples = static_cast<int>(f.size());
  rep.kappa = ft / tt;
  double rr = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) rr += std::pow(f[k] - rep.kappa * t[k], 2);
  rep.residual = std::sqrt(rr / ff);
  const double mf = std::accumulate(f.begin(), f.end(), 0.0) / f.size();
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
  double sft = 0.0, sff = 0.0, stt = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    sft += (f[k] - mf) * (t[k] - mt);
    sff += (f[k] - mf) * (f[k] - mf);
    stt += (t[k] - mt) * (t[k] - mt);
  }
  rep.correlation = sft / std::sqrt(sff * stt);
  if (rep.residual > 0.05)
    throw ConvergenceError("flux fit residual " + std::to_string(rep.residual) +
                           " exceeds 5%; the extension grid is under-resolved");
  return rep;
}

}  // namespace fraclab
