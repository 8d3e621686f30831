#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "fraclab/core/errors.hpp"

namespace fraclab {

// Order s of (-Delta)^s, restricted to the superdiffusive range (1/2, 1).
class FractionalOrder {
 public:
  explicit FractionalOrder(double s) : s_(s) {
    require(std::isfinite(s) && s > 0.5 && s < 1.0,
            "fractional order must lie strictly inside (1/2, 1), got " + std::to_string(s));
  }

  double s() const { return s_; }
  // Weight exponent of the extension problem; lies in (-1, 0).
  double a() const { return 1.0 - 2.0 * s_; }
  // Index of the symmetric stable law generated by -(-Delta)^s.
  double stable_index() const { return 2.0 * s_; }

  friend bool operator==(const FractionalOrder&, const FractionalOrder&) = default;

 private:
  double s_;
};

// Uniform tensor grid on [-R, R]^dim with an odd node count per axis, so x = 0 is a node.
class GridSpec {
 public:
  GridSpec(int dim, double half_width, int nodes) : dim_(dim), half_width_(half_width), n_(nodes) {
    require(dim == 1 || dim == 2, "grid dimension must be 1 or 2");
    require(std::isfinite(half_width) && half_width > 0.0, "grid half-width must be positive");
    require(nodes >= 33, "grid needs at least 33 nodes per axis, got " + std::to_string(nodes));
    require(nodes % 2 == 1, "grid node count must be odd so the origin is a node");
  }

  static GridSpec line(double half_width, int nodes) { return GridSpec(1, half_width, nodes); }

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int nodes_per_axis() const { return n_; }
  std::size_t size() const {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }
  double spacing() const { return 2.0 * half_width_ / (n_ - 1); }
  double coord(int i) const { return -half_width_ + i * spacing(); }
  int center_index() const { return (n_ - 1) / 2; }

  // Index of the node nearest to x, clamped to the grid.
  int nearest_index(double x) const {
    const int i = static_cast<int>(std::lround((x + half_width_) / spacing()));
    return std::clamp(i, 0, n_ - 1);
  }

  std::vector<double> coords() const {
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = coord(i);
    return x;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_;
  double half_width_;
  int n_;
};

// Nodal values on a GridSpec; 2-D fields are stored row-major with x fastest.
class ScalarField {
 public:
  explicit ScalarField(GridSpec grid) : grid_(grid), v_(grid.size(), 0.0) {}
  ScalarField(GridSpec grid, std::vector<double> values) : grid_(grid), v_(std::move(values)) {
    require(v_.size() == grid_.size(), "field size does not match its grid");
  }

  template <class F>
  static ScalarField sample(GridSpec grid, F&& f) {
    ScalarField out(grid);
    const int n = grid.nodes_per_axis();
    if constexpr (std::is_invocable_v<F, double>) {
      require(grid.dim() == 1, "a one-argument sampler needs a 1-D grid");
      for (int i = 0; i < n; ++i) out.v_[i] = f(grid.coord(i));
    } else {
      require(grid.dim() == 2, "a two-argument sampler needs a 2-D grid");
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out.v_[j * n + i] = f(grid.coord(i), grid.coord(j));
    }
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  std::span<const double> span() const { return v_; }

  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }
  double min() const { return *std::min_element(v_.begin(), v_.end()); }

  ScalarField& operator+=(const ScalarField& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

  // Piecewise-linear interpolant in 1-D; zero outside the box.
  double interpolate(double x) const {
    require(grid_.dim() == 1, "interpolate is 1-D only");
    const double R = grid_.half_width();
    if (!(x >= -R && x <= R)) return 0.0;
    const double t = (x + R) / grid_.spacing();
    const int n = grid_.nodes_per_axis();
    const int i = std::min(static_cast<int>(t), n - 2);
    const double f = t - i;
    return (1.0 - f) * v_[i] + f * v_[i + 1];
  }

 private:
  void check_same(const ScalarField& o) const {
    require(grid_ == o.grid_, "fields live on different grids");
  }

  GridSpec grid_;
  std::vector<double> v_;
};

inline double sup_distance(const ScalarField& a, const ScalarField& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Second-order central differences, one-sided second-order at the box faces.
// Returns one component per axis.
inline std::vector<ScalarField> gradient(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const int n = g.nodes_per_axis();
  const double inv2h = 0.5 / g.spacing();
  auto diff = [&](auto at) {
    std::vector<double> d(n);
    for (int i = 1; i < n - 1; ++i) d[i] = (at(i + 1) - at(i - 1)) * inv2h;
    d[0] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
    d[n - 1] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
    return d;
  };
  std::vector<ScalarField> out(g.dim(), ScalarField(g));
  if (g.dim() == 1) {
    out[0].values() = diff([&](int i) { return u[i]; });
    return out;
  }
  for (int j = 0; j < n; ++j) {
    auto row = diff([&](int i) { return u[j * n + i]; });
    for (int i = 0; i < n; ++i) out[0][j * n + i] = row[i];
  }
  for (int i = 0; i < n; ++i) {
    auto col = diff([&](int j) { return u[j * n + i]; });
    for (int j = 0; j < n; ++j) out[1][j * n + i] = col[j];
  }
  return out;
}

// Pairwise summation: deterministic for a fixed input order and well conditioned.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 32) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace fraclab
