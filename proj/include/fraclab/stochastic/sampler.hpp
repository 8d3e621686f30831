#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "fraclab/core/field.hpp"

namespace fraclab {

// Counter-based stream: SplitMix64 seeded from (seed, stream index), so path p draws the
// same numbers whichever thread runs it.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential() { return -std::log(uniform()); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

// Symmetric stable increments with E exp(i xi X) = exp(-dt |xi|^{2s}), i.e. the process
// generated by -(-Delta)^s. Chambers-Mallows-Stuck with skewness zero.
class StableIncrement {
 public:
  StableIncrement(const FractionalOrder& order, double dt)
      : alpha_(order.stable_index()), scale_(std::pow(dt, 1.0 / alpha_)) {
    require(dt > 0.0, "time step must be positive");
  }

  double alpha() const { return alpha_; }
  double scale() const { return scale_; }

  double operator()(PathRng& rng) const {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double cv = std::cos(v);
    // sin(a v) / cos(v)^{1/a} * (cos((1-a) v) / w)^{(1-a)/a}
    const double log_mag = -std::log(cv) / alpha_ +
                           (1.0 - alpha_) / alpha_ * (std::log(std::cos((1.0 - alpha_) * v)) - std::log(w));
    return scale_ * std::sin(alpha_ * v) * std::exp(log_mag);
  }

 private:
  double alpha_;
  double scale_;
};

inline double sample_stable_increment(const FractionalOrder& order, double dt, PathRng& rng) {
  return StableIncrement(order, dt)(rng);
}

}  // namespace fraclab
