#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/obstacle/operator.hpp"

namespace fraclab {

// beta_eps(t) = t^+ / eps
inline double beta_eps(double t, double epsilon) {
  require(epsilon > 0.0, "penalization parameter must be positive");
  return std::max(t, 0.0) / epsilon;
}

enum class PenaltyIteration {
  // u_k = (L + 1/eps)^{-1} max(phi, u_{k-1}) / eps, the monotone fixed-point sequence.
  Picard,
  // Active-set (policy) iteration on L u = (phi - u)^+ / eps; also non-decreasing from a
  // subsolution and exact after finitely many steps.
  Policy,
};

struct PenaltyOptions {
  double tol = 1e-10;
  long max_iter = 5'000'000;
  PenaltyIteration iteration = PenaltyIteration::Picard;
  // Allowed nodewise decrease between iterates and overshoot of the a priori bounds.
  double invariant_tol = 1e-10;
  // Iterates kept in the state: all of the first `keep_head`, then powers of two, then the last.
  int keep_head = 8;
};

struct PenalizationState {
  PenalizationState(double eps, const GridSpec& g) : epsilon(eps), beta_term(g) {}

  double epsilon = 0.0;
  std::vector<ScalarField> iterates;
  std::vector<long> iterate_index;
  ScalarField beta_term;
  long iterations = 0;
  double last_change = 0.0;
  // Monitored on every iterate, stored or not.
  double worst_decrease = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double upper_bound = 0.0;  // ||phi||_inf

  const ScalarField& solution() const { return iterates.back(); }
  bool invariants_hold(double tol = 1e-10) const {
    return worst_decrease <= tol && min_value >= -tol && max_value <= upper_bound + tol;
  }
};

namespace detail {
inline bool keep_iterate(long k, int head) { return k < head || (k & (k - 1)) == 0; }
}  // namespace detail

// Solves L u = beta_eps(phi - u), written as (L + 1/eps) u = max(phi, u) / eps, starting from
// `start` (zero by default, or a solution for a larger epsilon; both are subsolutions).
inline PenalizationState penalized_solve(const ProblemSpec& spec, const DiscreteOperator& op,
                                         double epsilon, const PenaltyOptions& opt = {},
                                         const ScalarField* start = nullptr) {
  require(epsilon > 0.0, "penalization parameter must be positive");
  require(spec.coeffs().potential().min() >= 0.0, "penalization needs c >= 0");
  require(op.grid() == spec.grid(), "operator built on a different grid");
  const GridSpec& g = spec.grid();
  const Eigen::Index n = g.nodes_per_axis();
  const Eigen::VectorXd phi = to_eigen(spec.obstacle());
  const double inv_eps = 1.0 / epsilon;

  PenalizationState st(epsilon, g);
  st.upper_bound = spec.obstacle().max_abs();
  Eigen::VectorXd u = start ? to_eigen(*start) : Eigen::VectorXd::Zero(n);
  st.iterates.push_back(from_eigen(g, u));
  st.iterate_index.push_back(0);
  st.min_value = u.minCoeff();
  st.max_value = u.maxCoeff();

  auto record = [&](const Eigen::VectorXd& next, long k) {
    st.worst_decrease = std::max(st.worst_decrease, (u - next).maxCoeff());
    st.min_value = std::min(st.min_value, next.minCoeff());
    st.max_value = std::max(st.max_value, next.maxCoeff());
    st.last_change = (next - u).cwiseAbs().maxCoeff();
    if (detail::keep_iterate(k, opt.keep_head)) {
      st.iterates.push_back(from_eigen(g, next));
      st.iterate_index.push_back(k);
    }
    if (!st.invariants_hold(opt.invariant_tol))
      throw ConvergenceError("penalized iterates left the monotone envelope at step " +
                             std::to_string(k) + " (solver bug)");
  };

  if (opt.iteration == PenaltyIteration::Picard) {
    Eigen::MatrixXd M = op.matrix();
    M.diagonal().array() += inv_eps;
    const Eigen::MatrixXd Minv = M.partialPivLu().inverse();
    Eigen::VectorXd rhs(n), next(n);
    long k = 1;
    for (; k <= opt.max_iter; ++k) {
      rhs = u.cwiseMax(phi) * inv_eps;
      next.noalias() = Minv * rhs;
      record(next, k);
      u.swap(next);
      if (st.last_change <= opt.tol) break;
    }
    if (k > opt.max_iter)
      throw ConvergenceError("penalized Picard iteration hit its iteration cap");
    st.iterations = std::min(k, opt.max_iter);
  } else {
    long k = 1;
    for (; k <= opt.max_iter; ++k) {
      Eigen::MatrixXd M = op.matrix();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (phi[i] > u[i]) {
          M(i, i) += inv_eps;
          rhs[i] = phi[i] * inv_eps;
        }
      Eigen::VectorXd next = M.partialPivLu().solve(rhs);
      record(next, k);
      u.swap(next);
      if (st.last_change <= opt.tol) break;
    }
    if (k > opt.max_iter)
      throw ConvergenceError("penalized policy iteration hit its iteration cap");
    st.iterations = std::min(k, opt.max_iter);
  }

  if (st.iterate_index.back() != st.iterations) {
    st.iterates.push_back(from_eigen(g, u));
    st.iterate_index.push_back(st.iterations);
  }
  for (Eigen::Index i = 0; i < n; ++i) st.beta_term[i] = beta_eps(phi[i] - u[i], epsilon);
  return st;
}

inline PenalizationState penalized_solve(const ProblemSpec& spec, double epsilon, double tol) {
  PenaltyOptions opt;
  opt.tol = tol;
  return penalized_solve(spec, DiscreteOperator(spec), epsilon, opt);
}

}  // namespace fraclab
