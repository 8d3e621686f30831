#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fraclab/obstacle/solve.hpp"
#include "fraclab/stochastic/sampler.hpp"

namespace fraclab {

struct PathConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  long n_paths = 100'000;
  std::uint64_t seed = 20240901;
  double kill_radius = 8.0;
  // Worker threads for path evaluation; results do not depend on it.
  int threads = 1;

  void validate(double c0) const {
    require(dt > 0.0 && std::isfinite(dt), "path time step must be positive");
    require(c0 > 0.0, "path discounting needs a positive potential floor");
    require(horizon >= 10.0 / c0 - 1e-12, "horizon must satisfy T >= 10 / c0");
    require(n_paths >= 10'000, "at least 1e4 paths are required");
    require(kill_radius > 0.0, "kill radius must be positive");
    require(threads >= 1, "thread count must be at least 1");
  }
  long steps() const { return std::lround(horizon / dt); }
};

struct ContactSetRule {};
struct FixedTimeRule {
  double t = 0.0;
};
struct NeverRule {};
// Stop on the first step that leaves the open interval (lo, hi).
struct FirstExitRule {
  double lo = 0.0;
  double hi = 0.0;
};
using StoppingRule = std::variant<ContactSetRule, FixedTimeRule, NeverRule, FirstExitRule>;

inline std::string rule_tag(const StoppingRule& r) {
  std::ostringstream os;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ContactSetRule>) os << "contact-set";
        if constexpr (std::is_same_v<T, FixedTimeRule>) os << "fixed-time:" << x.t;
        if constexpr (std::is_same_v<T, NeverRule>) os << "never";
        if constexpr (std::is_same_v<T, FirstExitRule>) os << "first-exit:" << x.lo << ":" << x.hi;
      },
      r);
  return os.str();
}

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  std::string rule;

  // mean <= bound + 4 stdError + allowance
  bool below(double bound, double allowance = 0.0) const {
    return mean <= bound + 4.0 * std_error + allowance;
  }
};

struct Path {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> discount;  // int_0^t c(X) ds by the left-endpoint rule
};

namespace detail {

// Nodal profile evaluated off-grid: linear inside, held at the edge value outside.
inline double clamp_interpolate(const ScalarField& f, double x) {
  const double R = f.grid().half_width();
  return f.interpolate(std::clamp(x, -R, R));
}

struct Dynamics {
  const ScalarField& b;
  const ScalarField& c;
  StableIncrement jump;
  double dt;
  bool jumps = true;

  // One Euler step; returns the discount increment rate c(x) at the left endpoint.
  double step(double& x, PathRng& rng) const {
    const double rate = clamp_interpolate(c, x);
    const double drift = clamp_interpolate(b, x);
    x = x - drift * dt + (jumps ? jump(rng) : 0.0);
    return rate;
  }
};

inline MCEstimate summarize(const std::vector<double>& payoff, std::string tag) {
  MCEstimate e;
  e.n_paths = static_cast<long>(payoff.size());
  e.rule = std::move(tag);
  e.mean = pairwise_sum(payoff) / e.n_paths;
  std::vector<double> sq(payoff.size());
  for (std::size_t i = 0; i < payoff.size(); ++i) sq[i] = (payoff[i] - e.mean) * (payoff[i] - e.mean);
  const double var = e.n_paths > 1 ? pairwise_sum(sq) / (e.n_paths - 1) : 0.0;
  e.std_error = std::sqrt(var / e.n_paths);
  return e;
}

template <class F>
void parallel_paths(long n, int threads, F&& body) {
  if (threads <= 1 || n < 2 * threads) {
    for (long p = 0; p < n; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      for (long p = lo; p < hi; ++p) body(p);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct PathOptions {
  // Test hook: drop the jump part and keep only the drift.
  bool jumps = true;
};

// Euler scheme X_{k+1} = X_k - b(X_k) dt + stable increment, stopped at T or when
// |X| > killRadius. Path index selects the random stream.
inline Path simulate_path(double x0, const ProblemSpec& spec, const PathConfig& cfg,
                          std::uint64_t path_index = 0, const PathOptions& popt = {}) {
  cfg.validate(spec.coeffs().floor());
  detail::Dynamics dyn{spec.coeffs().drift(), spec.coeffs().potential(),
                       StableIncrement(spec.order(), cfg.dt), cfg.dt, popt.jumps};
  PathRng rng(cfg.seed, path_index);
  Path path;
  double x = x0, rate_sum = 0.0;
  const long K = cfg.steps();
  path.times.push_back(0.0);
  path.states.push_back(x);
  path.discount.push_back(0.0);
  for (long k = 1; k <= K; ++k) {
    rate_sum += dyn.step(x, rng);
    path.times.push_back(k * cfg.dt);
    path.states.push_back(x);
    path.discount.push_back(rate_sum * cfg.dt);
    if (std::abs(x) > cfg.kill_radius) break;
  }
  return path;
}

// Discounted payoff e^{-D} phi(X_tau) under a stopping rule; 0 when the path is killed or
// never stops before T.
inline MCEstimate value_at(int node, const StoppingRule& rule, const ProblemSpec& spec,
                           const ObstacleSolution& sol, const PathConfig& cfg) {
  cfg.validate(spec.coeffs().floor());
  const GridSpec& g = spec.grid();
  require(node >= 0 && node < g.nodes_per_axis(), "probe must be a grid node");
  const double x0 = g.coord(node);
  const ScalarField& phi = spec.obstacle();
  const bool contact_rule = std::holds_alternative<ContactSetRule>(rule);
  if (contact_rule && sol.contact_empty())
    throw PreconditionError("contact set is empty; use fixed-time probes instead");
  const std::string tag = rule_tag(rule);

  // Never stopping pays nothing: the horizon payoff is zero by construction.
  if (std::holds_alternative<NeverRule>(rule)) {
    std::vector<double> zeros(cfg.n_paths, 0.0);
    return detail::summarize(zeros, tag);
  }

  const long K = cfg.steps();
  long stop_step = -1;
  if (auto* f = std::get_if<FixedTimeRule>(&rule)) {
    require(f->t >= 0.0 && f->t <= cfg.horizon, "fixed stopping time outside [0, T]");
    stop_step = std::lround(f->t / cfg.dt);
  }
  const FirstExitRule* exit_rule = std::get_if<FirstExitRule>(&rule);
  const double R = g.half_width();
  auto stops = [&](double x, long k) {
    if (contact_rule) return std::abs(x) <= R && sol.in_contact(g.nearest_index(x));
    if (exit_rule) return !(x > exit_rule->lo && x < exit_rule->hi);
    return k == stop_step;
  };

  detail::Dynamics dyn{spec.coeffs().drift(), spec.coeffs().potential(),
                       StableIncrement(spec.order(), cfg.dt), cfg.dt};
  std::vector<double> payoff(cfg.n_paths, 0.0);
  detail::parallel_paths(cfg.n_paths, cfg.threads, [&](long p) {
    PathRng rng(cfg.seed, static_cast<std::uint64_t>(p));
    double x = x0, rate_sum = 0.0;
    if (stops(x, 0)) {
      payoff[p] = phi.interpolate(x);
      return;
    }
    for (long k = 1; k <= K; ++k) {
      rate_sum += dyn.step(x, rng);
      if (std::abs(x) > cfg.kill_radius) return;
      if (stops(x, k)) {
        payoff[p] = std::exp(-rate_sum * cfg.dt) * phi.interpolate(x);
        return;
      }
    }
  });
  return detail::summarize(payoff, tag);
}

inline std::vector<StoppingRule> default_alternative_rules(double x0, double half_width = 0.5) {
  return {FixedTimeRule{0.0}, FixedTimeRule{0.1}, FixedTimeRule{0.5}, FixedTimeRule{1.0},
          FirstExitRule{x0 - half_width, x0 + half_width}, NeverRule{}};
}

// Runs every alternative rule at the probe; each must stay below u(x0) within MC error.
inline std::vector<MCEstimate> suboptimality_check(int node, const std::vector<StoppingRule>& rules,
                                                   const ProblemSpec& spec,
                                                   const ObstacleSolution& sol,
                                                   const PathConfig& cfg) {
  std::vector<MCEstimate> out;
  for (const auto& r : rules) out.push_back(value_at(node, r, spec, sol, cfg));
  return out;
}

}  // namespace fraclab
