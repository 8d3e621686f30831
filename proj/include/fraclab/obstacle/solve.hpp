#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fraclab/obstacle/penalization.hpp"

namespace fraclab {

struct ObstacleSolution {
  explicit ObstacleSolution(const GridSpec& g) : u(g), residual_Lu(g) {}

  ScalarField u;
  ScalarField residual_Lu;
  std::vector<char> contact;  // u - phi <= contact_tol
  double contact_tol = 0.0;
  double comp_residual = 0.0;  // ||min(Lu, u - phi)||_inf over interior nodes
  std::vector<int> free_boundary;
  // Filled by obstacle_solve.
  double comp_bound = 0.0;
  double lphi_plus = 0.0;  // ||(L phi)^+||_inf
  std::vector<double> eps_used;
  std::vector<double> comp_trace;  // compResidual after each epsilon
  std::vector<long> iterations;
  bool converged = true;

  bool in_contact(int i) const { return contact[i] != 0; }
  bool contact_empty() const { return std::none_of(contact.begin(), contact.end(), [](char c) { return c; }); }
};

struct ObstacleOptions {
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  double tol = 1e-10;
  PenaltyIteration iteration = PenaltyIteration::Picard;
  // Residual floor relative to ||phi||_inf.
  double grid_tol_rel = 1e-4;
  // Complementarity is measured this many cells away from the box faces.
  int boundary_layer = 4;
};

namespace detail {

// Contact nodes adjacent to a non-contact node.
inline std::vector<int> mask_transitions(const std::vector<char>& contact) {
  std::vector<int> out;
  const int n = static_cast<int>(contact.size());
  for (int i = 0; i < n; ++i) {
    if (!contact[i]) continue;
    const bool left_free = i > 0 && !contact[i - 1];
    const bool right_free = i + 1 < n && !contact[i + 1];
    if (left_free || right_free) out.push_back(i);
  }
  return out;
}

inline void finish_solution(ObstacleSolution& sol, const ProblemSpec& spec,
                            const DiscreteOperator& op, int boundary_layer) {
  const ScalarField& phi = spec.obstacle();
  const int n = spec.grid().nodes_per_axis();
  sol.residual_Lu = op.apply(sol.u);
  sol.contact.assign(n, 0);
  for (int i = 0; i < n; ++i) sol.contact[i] = (sol.u[i] - phi[i] <= sol.contact_tol) ? 1 : 0;
  sol.free_boundary = mask_transitions(sol.contact);
  sol.comp_residual = 0.0;
  for (int i = boundary_layer; i < n - boundary_layer; ++i)
    sol.comp_residual =
        std::max(sol.comp_residual, std::abs(std::min(sol.residual_Lu[i], sol.u[i] - phi[i])));
}

}  // namespace detail

inline double lphi_plus_norm(const ProblemSpec& spec, const DiscreteOperator& op) {
  const ScalarField Lphi = op.apply(spec.obstacle());
  double m = 0.0;
  for (std::size_t i = 0; i < Lphi.size(); ++i) m = std::max(m, Lphi[i]);
  return m;
}

// Penalized continuation over a decreasing epsilon schedule, each stage warm-started
// from the previous one. Sets `converged` false (never throws) when the final
// complementarity residual exceeds max(10 eps_last ||(L phi)^+||, grid_tol_rel ||phi||).
inline ObstacleSolution obstacle_solve(const ProblemSpec& spec, const ObstacleOptions& opt = {},
                                       const DiscreteOperator* op_in = nullptr) {
  const auto& eps = opt.eps_schedule;
  require(!eps.empty(), "epsilon schedule is empty");
  for (std::size_t k = 1; k < eps.size(); ++k)
    require(eps[k] < eps[k - 1], "epsilon schedule must be strictly decreasing");
  require(eps.back() <= 1e-4, "last epsilon must be at most 1e-4");
  std::optional<DiscreteOperator> own;
  if (!op_in) own.emplace(spec);
  const DiscreteOperator& op = op_in ? *op_in : *own;

  ObstacleSolution sol(spec.grid());
  sol.contact_tol = 10.0 * opt.tol;
  sol.lphi_plus = lphi_plus_norm(spec, op);
  PenaltyOptions popt;
  popt.tol = opt.tol;
  popt.iteration = opt.iteration;
  popt.keep_head = 1;
  std::optional<ScalarField> warm;
  for (double e : eps) {
    PenalizationState st = penalized_solve(spec, op, e, popt, warm ? &*warm : nullptr);
    warm = st.solution();
    sol.u = *warm;
    detail::finish_solution(sol, spec, op, opt.boundary_layer);
    sol.eps_used.push_back(e);
    sol.comp_trace.push_back(sol.comp_residual);
    sol.iterations.push_back(st.iterations);
  }
  sol.comp_bound =
      std::max(10.0 * eps.back() * sol.lphi_plus, opt.grid_tol_rel * spec.obstacle().max_abs());
  sol.converged = sol.comp_residual <= sol.comp_bound;
  return sol;
}

// Exact solution of the discrete complementarity system min(A u, u - phi) = 0 by policy
// (Howard) iteration, warm-started from an approximate solution such as the penalized one.
// Contact rows are pinned to phi exactly, so u - phi vanishes identically on the contact set.
inline ObstacleSolution complementarity_polish(const ProblemSpec& spec, const ObstacleSolution& start,
                                               const DiscreteOperator* op_in = nullptr,
                                               int max_policies = 200) {
  std::optional<DiscreteOperator> own;
  if (!op_in) own.emplace(spec);
  const DiscreteOperator& op = op_in ? *op_in : *own;
  const Eigen::MatrixXd& A = op.matrix();
  const Eigen::VectorXd phi = to_eigen(spec.obstacle());
  const Eigen::Index n = phi.size();
  Eigen::VectorXd u = to_eigen(start.u);
  std::vector<char> pinned(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) pinned[i] = start.in_contact(static_cast<int>(i));
  int policies = 0;
  for (;; ++policies) {
    if (policies == max_policies)
      throw ConvergenceError("complementarity polish did not settle on a contact set");
    Eigen::MatrixXd M = A;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (pinned[i]) {
        M.row(i).setZero();
        M(i, i) = 1.0;
        rhs[i] = phi[i];
      }
    // Rows scale like h^{-2s}; two refinement sweeps bring A u on free rows down to roundoff
    // of the residual rather than of the factorization.
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    u = lu.solve(rhs);
    for (int sweep = 0; sweep < 2; ++sweep) u += lu.solve(rhs - M * u);
    for (Eigen::Index i = 0; i < n; ++i)
      if (pinned[i]) u[i] = phi[i];
    const Eigen::VectorXd Au = A * u;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const char next = (u[i] - phi[i] < Au[i]) ? 1 : 0;
      if (next != pinned[i]) changed = true;
      pinned[i] = next;
    }
    if (!changed) break;
  }
  ObstacleSolution sol = start;
  sol.u = from_eigen(spec.grid(), u);
  sol.contact_tol = 1e-12 * std::max(1.0, spec.obstacle().max_abs());
  detail::finish_solution(sol, spec, op, 4);
  sol.iterations.push_back(policies + 1);
  sol.converged = sol.comp_residual <= 1e-9 * std::max(1.0, spec.obstacle().max_abs());
  return sol;
}

struct LcpOptions {
  double tol = 1e-10;
  long max_sweeps = 2'000'000;
  double contact_tol = 1e-9;
  int boundary_layer = 4;
};

// Projected Gauss-Seidel on min(A u, u - phi) = 0 with the assembled dense operator.
// Independent of the penalization path; intended for grids of at most 129 nodes.
inline ObstacleSolution lcp_oracle(const ProblemSpec& spec, const LcpOptions& opt = {}) {
  const int n = spec.grid().nodes_per_axis();
  require(n <= 129, "the LCP oracle is restricted to grids with at most 129 nodes");
  const DiscreteOperator op(spec);
  const Eigen::MatrixXd& A = op.matrix();
  const ScalarField& phi = spec.obstacle();
  std::vector<double> u(n, 0.0);
  for (int i = 0; i < n; ++i) u[i] = std::max(phi[i], 0.0);
  double change = 0.0;
  long sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    change = 0.0;
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) off += A(i, j) * u[j];
      const double next = std::max(phi[i], -off / A(i, i));
      change = std::max(change, std::abs(next - u[i]));
      u[i] = next;
    }
    if (change <= opt.tol) break;
  }
  if (sweep == opt.max_sweeps)
    throw ConvergenceError("projected Gauss-Seidel stalled; last sweep change " +
                           std::to_string(change));
  ObstacleSolution sol(spec.grid());
  sol.u = ScalarField(spec.grid(), u);
  sol.contact_tol = opt.contact_tol;
  sol.lphi_plus = lphi_plus_norm(spec, op);
  detail::finish_solution(sol, spec, op, opt.boundary_layer);
  sol.iterations.push_back(sweep + 1);
  return sol;
}

}  // namespace fraclab
