#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "fraclab/core/field.hpp"

namespace fraclab {

// Real-to-complex transform pair of one length. Plans are built once per length under a
// lock (planning is not thread-safe); execution uses the new-array interface and is.
class RealTransform {
 public:
  static const RealTransform& of_length(int N) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<RealTransform>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[N];
    if (!slot) slot.reset(new RealTransform(N));
    return *slot;
  }

  int length() const { return N_; }
  int modes() const { return N_ / 2 + 1; }

  std::vector<std::complex<double>> forward(std::vector<double> x) const {
    require(static_cast<int>(x.size()) == N_, "transform length mismatch");
    std::vector<std::complex<double>> out(modes());
    fftw_execute_dft_r2c(fwd_, x.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  // Unnormalized inverse: forward followed by inverse multiplies by N.
  std::vector<double> inverse(std::vector<std::complex<double>> c) const {
    require(static_cast<int>(c.size()) == modes(), "transform length mismatch");
    std::vector<double> out(N_);
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(c.data()), out.data());
    return out;
  }

  ~RealTransform() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;

 private:
  explicit RealTransform(int N) : N_(N) {
    require(N >= 2 && N % 2 == 0, "periodic transform length must be even");
    std::vector<double> x(N);
    std::vector<std::complex<double>> c(N / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
    fwd_ = fftw_plan_dft_r2c_1d(N, x.data(), reinterpret_cast<fftw_complex*>(c.data()), flags);
    // c2r cannot preserve its input; callers pass a scratch copy.
    inv_ = fftw_plan_dft_c2r_1d(N, reinterpret_cast<fftw_complex*>(c.data()), x.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  int N_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

// The box is treated as one period: the last node duplicates the first, so the transform
// runs on the first n - 1 nodes and wavenumbers are xi_k = pi k / R.
// With padding P > 1 the data are extended by zero to [-P R, P R] before periodizing,
// which pushes the periodic images P times further away.
class PeriodicBox {
 public:
  explicit PeriodicBox(const GridSpec& grid, int padding = 1) : grid_(grid), pad_(padding) {
    require(grid.dim() == 1, "spectral operators are 1-D only");
    require(padding >= 1, "padding factor must be at least 1");
  }

  int length() const { return pad_ * (grid_.nodes_per_axis() - 1); }
  int padding() const { return pad_; }
  double period() const { return 2.0 * pad_ * grid_.half_width(); }
  double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / period(); }
  // Position of grid node 0 inside the periodic array.
  int offset() const { return (pad_ - 1) * (grid_.nodes_per_axis() - 1) / 2; }

  std::vector<std::complex<double>> coefficients(const ScalarField& u) const {
    require(u.grid() == grid_, "field lives on a different grid");
    const int n = grid_.nodes_per_axis();
    std::vector<double> x(length(), 0.0);
    const int copy = pad_ == 1 ? n - 1 : n;
    for (int i = 0; i < copy; ++i) x[offset() + i] = u[i];
    return RealTransform::of_length(length()).forward(std::move(x));
  }

  ScalarField synthesize(std::vector<std::complex<double>> c) const {
    const int N = length();
    const int n = grid_.nodes_per_axis();
    auto x = RealTransform::of_length(N).inverse(std::move(c));
    ScalarField out(grid_);
    for (int i = 0; i < n - 1; ++i) out[i] = x[offset() + i] / N;
    out[n - 1] = x[(offset() + n - 1) % N] / N;
    return out;
  }

  // Multiplies the coefficients by symbol(|xi|).
  template <class Symbol>
  ScalarField apply(const ScalarField& u, Symbol&& symbol) const {
    auto c = coefficients(u);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= symbol(wavenumber(static_cast<int>(k)));
    return synthesize(std::move(c));
  }

 private:
  GridSpec grid_;
  int pad_;
};

namespace detail {
inline void warn_if_not_decaying(const ScalarField& u, const char* who) {
  const double m = u.max_abs();
  const int n = u.grid().nodes_per_axis();
  if (m > 0.0 && std::max(std::abs(u[0]), std::abs(u[n - 1])) > 1e-8 * m)
    warn(std::string(who) + ": boundary values are not small; periodization may alias");
}
}  // namespace detail

// Inverse transform of |xi|^{2s} u^.
inline ScalarField apply_spectral(const ScalarField& u, const FractionalOrder& order,
                                  int padding = 1) {
  PeriodicBox box(u.grid(), padding);
  if (padding == 1) detail::warn_if_not_decaying(u, "apply_spectral");
  const double two_s = 2.0 * order.s();
  return box.apply(u, [two_s](double xi) { return xi == 0.0 ? 0.0 : std::pow(xi, two_s); });
}

// Inverse transform of |xi|^{-2s} f^ with the mean mode removed.
inline ScalarField riesz_potential(const ScalarField& f, const FractionalOrder& order) {
  PeriodicBox box(f.grid());
  detail::warn_if_not_decaying(f, "riesz_potential");
  const double two_s = 2.0 * order.s();
  return box.apply(f, [two_s](double xi) { return xi == 0.0 ? 0.0 : std::pow(xi, -two_s); });
}

// Trigonometric interpolant of nodal data on the periodic box, evaluable anywhere.
// Coefficients may be pre-multiplied by a radial symbol.
class TrigInterpolant {
 public:
  TrigInterpolant(const ScalarField& u) : box_(u.grid()), R_(u.grid().half_width()) {
    c_ = box_.coefficients(u);
  }
  template <class Symbol>
  TrigInterpolant(const ScalarField& u, Symbol&& symbol) : TrigInterpolant(u) {
    for (std::size_t k = 0; k < c_.size(); ++k)
      c_[k] *= symbol(box_.wavenumber(static_cast<int>(k)));
  }

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }

  const std::vector<std::complex<double>>& coefficients() const { return c_; }
  const PeriodicBox& box() const { return box_; }

 private:
  // Real part of the mode sum, Nyquist mode counted once.
  double eval(double x, int deriv) const {
    const int N = box_.length();
    const int K = N / 2;
    const double theta = std::numbers::pi * (x + R_) / R_;
    const std::complex<double> step(std::cos(theta), std::sin(theta));
    std::complex<double> rot(1.0, 0.0);
    double acc = deriv == 0 ? c_[0].real() : 0.0;
    for (int k = 1; k <= K; ++k) {
      rot *= step;
      const double mult = k == K ? 1.0 : 2.0;
      const std::complex<double> term = c_[k] * rot;
      if (deriv == 0)
        acc += mult * term.real();
      else if (k < K)
        acc += mult * box_.wavenumber(k) * (-term.imag());
    }
    return acc / N;
  }

  PeriodicBox box_;
  double R_;
  std::vector<std::complex<double>> c_;
};

}  // namespace fraclab
