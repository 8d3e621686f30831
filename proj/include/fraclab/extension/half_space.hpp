#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "fraclab/core/field.hpp"

namespace fraclab {

// Upper half-plane grid: the 1-D x grid times rows y_j = Y (j/m)^q, q = 1/(1+a) > 1, so
// rows crowd toward y = 0 where the weight |y|^a blows up. Row 0 is the trace y = 0.
class HalfSpaceGrid {
 public:
  HalfSpaceGrid(GridSpec x, const FractionalOrder& order, double extent, int rows,
                bool even_reflection = true)
      : x_(x), extent_(extent), rows_(rows), q_(1.0 / (1.0 + order.a())), even_(even_reflection) {
    require(x.dim() == 1, "half-space grid needs a 1-D x grid");
    require(std::isfinite(extent) && extent > 0.0, "y extent must be positive");
    require(rows >= 4, "half-space grid needs at least 4 rows");
    require(q_ > 1.0, "stretch exponent must exceed 1");
  }

  // Y = R/2 and 64 rows unless told otherwise.
  static HalfSpaceGrid over(GridSpec x, const FractionalOrder& order, int rows = 64) {
    return HalfSpaceGrid(x, order, 0.5 * x.half_width(), rows);
  }

  const GridSpec& x() const { return x_; }
  double extent() const { return extent_; }
  int rows() const { return rows_; }
  double stretch() const { return q_; }
  bool even_reflection() const { return even_; }
  // y(0) = 0 is the trace row; y(1) > 0 is the first interior row.
  double y(int j) const { return extent_ * std::pow(static_cast<double>(j) / rows_, q_); }

 private:
  GridSpec x_;
  double extent_;
  int rows_;
  double q_;
  bool even_;
};

// Pointwise description of a field on the closed upper half-plane in absolute coordinates.
// `flux` is lim_{y -> 0} y^a dv/dy, `slope` is d/dx v(x, 0), and `row` optionally fills a
// whole grid row at height y. Only `value` is mandatory.
struct ExtensionModel {
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> gradient;
  std::function<double(double)> flux;
  std::function<double(double)> slope;
  std::function<std::vector<double>(double)> row;
};

// A field v(x, y) on the half-plane, sampled on a HalfSpaceGrid and evaluable anywhere
// through its model. Public coordinates are centred at `origin` (the base point) and
// extend to y < 0 by even reflection.
class ExtensionField {
 public:
  ExtensionField(HalfSpaceGrid grid, const FractionalOrder& order, ExtensionModel model,
                 double origin = 0.0, int base_index = -1, int threads = 1)
      : grid_(grid), order_(order), model_(std::move(model)), origin_(origin), base_(base_index) {
    require(static_cast<bool>(model_.value), "extension model needs a value function");
    require(std::abs(origin) < grid.x().half_width(), "origin must lie inside the box");
    const int n = grid_.x().nodes_per_axis();
    const int m = grid_.rows();
    values_.assign(static_cast<std::size_t>(m + 1) * n, 0.0);
    auto fill = [&](int j) {
      const double y = grid_.y(j);
      if (model_.row) {
        const std::vector<double> r = model_.row(y);
        require(static_cast<int>(r.size()) == n, "model row has the wrong length");
        std::copy(r.begin(), r.end(), values_.begin() + static_cast<std::ptrdiff_t>(j) * n);
      } else {
        for (int i = 0; i < n; ++i) values_[static_cast<std::size_t>(j) * n + i] = model_.value(grid_.x().coord(i), y);
      }
    };
    threads = std::max(1, threads);
    if (threads == 1) {
      for (int j = 0; j <= m; ++j) fill(j);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
          for (int j = t; j <= m; j += threads) fill(j);
        });
      for (auto& th : pool) th.join();
    }
  }

  const HalfSpaceGrid& grid() const { return grid_; }
  const FractionalOrder& order() const { return order_; }
  double origin() const { return origin_; }
  int base_index() const { return base_; }
  // Largest radius around the origin that stays inside the sampled region.
  double radius_limit() const {
    return std::min(grid_.extent(), grid_.x().half_width() - std::abs(origin_));
  }

  double value(double x, double y) const { return model_.value(origin_ + x, std::abs(y)); }

  std::array<double, 2> gradient(double x, double y) const {
    require(static_cast<bool>(model_.gradient), "extension model has no gradient");
    auto g = model_.gradient(origin_ + x, std::abs(y));
    if (y < 0.0) g[1] = -g[1];
    return g;
  }

  double flux(double x) const {
    require(static_cast<bool>(model_.flux), "extension model has no trace flux");
    return model_.flux(origin_ + x);
  }
  double trace_slope(double x) const {
    require(static_cast<bool>(model_.slope), "extension model has no trace slope");
    return model_.slope(origin_ + x);
  }
  const ExtensionModel& model() const { return model_; }
  bool has_gradient() const { return static_cast<bool>(model_.gradient); }
  bool has_flux() const { return static_cast<bool>(model_.flux); }
  bool has_slope() const { return static_cast<bool>(model_.slope); }

  // Stored sample at x node i and row j (absolute grid coordinates).
  double at(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * grid_.x().nodes_per_axis() + i];
  }
  ScalarField trace() const {
    const int n = grid_.x().nodes_per_axis();
    return ScalarField(grid_.x(), std::vector<double>(values_.begin(), values_.begin() + n));
  }

 private:
  HalfSpaceGrid grid_;
  FractionalOrder order_;
  ExtensionModel model_;
  double origin_;
  int base_;
  std::vector<double> values_;
};

// Sup of the discrete div(|y|^a grad v) / y^a over interior cells: the middle 80% of the x
// range and rows with y >= Y/16. Rows closer to the trace are excluded because the stretched
// grid is self-similar there (the first cells never refine relative to their own height),
// so their truncation error does not shrink. Finite volumes in y: the face flux uses the exact resistance
// int y^{-a} dy between rows (so c + d y^{1-a} is reproduced exactly) and the cell measure
// int y^a dy over the dual cell; standard second difference in x.
inline double la_residual(const ExtensionField& v) {
  const HalfSpaceGrid& g = v.grid();
  const int n = g.x().nodes_per_axis();
  const int m = g.rows();
  const double h = g.x().spacing();
  const double a = v.order().a();
  auto resistance = [&](double lo, double hi) {
    return (std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a)) / (1.0 - a);
  };
  auto measure = [&](double lo, double hi) {
    return (std::pow(hi, 1.0 + a) - std::pow(lo, 1.0 + a)) / (1.0 + a);
  };
  const int lo = std::max(1, n / 10), hi = std::min(n - 2, n - 1 - n / 10);
  double worst = 0.0;
  for (int j = 1; j < m; ++j) {
    const double ym = g.y(j - 1), y0 = g.y(j), yp = g.y(j + 1);
    if (ym < g.extent() / 16.0) continue;
    const double rm = resistance(ym, y0), rp = resistance(y0, yp);
    const double cell = measure(0.5 * (ym + y0), 0.5 * (y0 + yp));
    for (int i = lo; i <= hi; ++i) {
      const double vxx = (v.at(i + 1, j) - 2.0 * v.at(i, j) + v.at(i - 1, j)) / (h * h);
      const double div_y = (v.at(i, j + 1) - v.at(i, j)) / rp - (v.at(i, j) - v.at(i, j - 1)) / rm;
      worst = std::max(worst, std::abs(vxx + div_y / cell));
    }
  }
  return worst;
}

}  // namespace fraclab
