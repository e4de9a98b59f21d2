// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "sparseloc/rigidity.hpp"

namespace sparseloc {

BlockVector group_soft_threshold(const BlockVector& v, double lambda) {
  if (lambda < 0.0) throw Error("group_soft_threshold: lambda must be non-negative");
  BlockVector out = v;
  for (int i = 0; i < v.num_blocks(); ++i) {
    const double norm = v.block_norm(i);
    if (norm <= lambda) {
      out.block(i).setZero();
    } else {
      out.block(i) *= 1.0 - lambda / norm;
    }
  }
  return out;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::iteration_limit:
      return "iteration_limit";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

std::string_view to_string(ScpStatus status) {
  switch (status) {
    case ScpStatus::converged:
      return "converged";
    case ScpStatus::iteration_limit:
      return "iteration_limit";
    case ScpStatus::inner_failure:
      return "inner_failure";
  }
  return "unknown";
}

namespace {

void soft_threshold_in_place(Eigen::VectorXd& v, int d, double lambda) {
  for (Eigen::Index i = 0; i < v.size(); i += d) {
    auto b = v.segment(i, d);
    const double norm = b.norm();
    if (norm <= lambda) {
      b.setZero();
    } else {
      b *= 1.0 - lambda / norm;
    }
  }
}

void project_to_ball(Eigen::VectorXd& t, const Eigen::VectorXd& center, double radius) {
  const Eigen::VectorXd off = t - center;
  const double norm = off.norm();
  if (norm > radius) t = center + off * (radius / norm);
}

}  // namespace

// ADMM on  min ||u||_{2,1} + I_ball(t)  s.t.  u = w,  t = R w.
// The w-update solves (I + R^T R) w = (u + a) + R^T (t + b) with a Cholesky
// factor computed once; the penalty rescales both constraints, so residual
// balancing never invalidates the factor.
BpdnSolution solve_bpdn(const BpdnProblem& problem, const BpdnOptions& options, const BpdnState* warm_start) {
  const auto& R = problem.matrix;
  const Eigen::Index n = R.cols();
  const Eigen::Index m = R.rows();
  const int d = problem.block_dim;
  if (d <= 0 || n % d != 0) throw Error("solve_bpdn: column count must be a multiple of the block length");
  if (problem.rhs.size() != m) throw Error("solve_bpdn: rhs length does not match the matrix");
  if (problem.slack < 0.0) throw Error("solve_bpdn: slack must be non-negative");
  const Eigen::VectorXd offset = problem.offset.size() == 0 ? Eigen::VectorXd::Zero(n) : problem.offset;
  if (offset.size() != n) throw Error("solve_bpdn: offset length does not match the matrix");

  BpdnSolution sol;
  const Eigen::VectorXd b = problem.rhs + R * offset;
  const double eps = std::max(problem.slack, options.slack_floor);
  sol.effective_slack = eps;

  auto finish_zero = [&] {
    sol.shifted = Eigen::VectorXd::Zero(n);
    sol.step = -offset;
    sol.dual = Eigen::VectorXd::Zero(m);
    sol.status = SolveStatus::converged;
    sol.state = {sol.shifted, sol.shifted, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(n),
                 Eigen::VectorXd::Zero(m), options.initial_penalty};
    return sol;
  };

  if (b.norm() <= eps) return finish_zero();

  if (m > 0) {
    const Eigen::VectorXd fit = R.completeOrthogonalDecomposition().solve(b);
    sol.range_distance = (b - R * fit).norm();
  }
  const double scale = std::max(1.0, b.norm());
  if (sol.range_distance > eps + 1e-12 * scale) {
    sol.status = SolveStatus::infeasible;
    sol.shifted = offset;
    sol.step = Eigen::VectorXd::Zero(n);
    sol.dual = Eigen::VectorXd::Zero(m);
    return sol;
  }

  const Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(n, n) + R.transpose() * R;
  const Eigen::LLT<Eigen::MatrixXd> factor(gram);

  Eigen::VectorXd w, u, t, a, bd;
  double rho = options.initial_penalty;
  if (warm_start && warm_start->w.size() == n && warm_start->scaled_dual_t.size() == m) {
    w = warm_start->w;
    u = warm_start->u;
    a = warm_start->scaled_dual_w;
    bd = warm_start->scaled_dual_t;
    rho = warm_start->penalty;
    t = R * w;
    project_to_ball(t, b, eps);
  } else {
    w = Eigen::VectorXd::Zero(n);
    u = w;
    a = Eigen::VectorXd::Zero(n);
    bd = Eigen::VectorXd::Zero(m);
    t = Eigen::VectorXd::Zero(m);
    project_to_ball(t, b, eps);
  }

  Eigen::VectorXd Rw(m), u_prev, t_prev;
  double r_pri = 0.0, r_dual = 0.0;
  int it = 0;
  sol.status = SolveStatus::iteration_limit;
  for (it = 1; it <= options.max_iterations; ++it) {
    w = factor.solve(u + a + R.transpose() * (t + bd));
    Rw.noalias() = R * w;

    u_prev = u;
    t_prev = t;
    u = w - a;
    soft_threshold_in_place(u, d, 1.0 / rho);
    t = Rw - bd;
    project_to_ball(t, b, eps);

    a += u - w;
    bd += t - Rw;

    r_pri = std::sqrt((u - w).squaredNorm() + (t - Rw).squaredNorm());
    r_dual = rho * ((u - u_prev) + R.transpose() * (t - t_prev)).norm();

    const double tol_pri = options.tolerance * std::max(1.0, std::max(b.norm(), u.norm()));
    const double tol_dual = options.tolerance * std::max(1.0, rho * std::sqrt(a.squaredNorm() + bd.squaredNorm()));
    if (r_pri < tol_pri && r_dual < tol_dual) {
      sol.status = SolveStatus::converged;
      break;
    }

    if (options.rebalance_every > 0 && it % options.rebalance_every == 0) {
      if (r_pri > 10.0 * r_dual) {
        rho *= 2.0;
        a /= 2.0;
        bd /= 2.0;
      } else if (r_dual > 10.0 * r_pri) {
        rho /= 2.0;
        a *= 2.0;
        bd *= 2.0;
      }
    }
  }

  sol.iterations = std::min(it, options.max_iterations);
  sol.primal_residual = r_pri;
  sol.dual_residual = r_dual;
  sol.shifted = u;
  sol.step = u - offset;
  sol.dual = -rho * bd;
  sol.state = {w, u, t, a, bd, rho};
  return sol;
}

IndexSet identify_support(const BlockVector& x, double threshold) {
  if (threshold < 0.0) throw Error("identify_support: threshold must be non-negative");
  IndexSet out;
  for (int i = 0; i < x.num_blocks(); ++i)
    if (x.block_norm(i) > threshold) out.push_back(i);
  return out;
}

double default_support_threshold(const BlockVector& x) {
  const double max_norm = x.num_blocks() > 0 ? x.block_norms().maxCoeff() : 0.0;
  return 1e-3 * std::max(1.0, max_norm);
}

void ScpParams::validate() const {
  if (max_iterations < 1) throw Error("ScpParams: max_iterations must be at least 1");
  if (initial_slack < 0.0) throw Error("ScpParams: initial_slack must be non-negative");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw Error("ScpParams: shrink must lie in (0, 1]");
  if (step_tolerance < 0.0) throw Error("ScpParams: step_tolerance must be non-negative");
  if (support_threshold && *support_threshold < 0.0) throw Error("ScpParams: support_threshold must be non-negative");
}

double normalize_shrink(double value) {
  if (!(value > 0.0)) throw Error("shrink factor must be positive");
  return value > 1.0 ? 1.0 / value : value;
}

RecoveryResult scp_recover(const Configuration& estimates, const MeasurementSet& y, const SensorGraph& graph,
                           const ScpParams& params) {
  params.validate();
  if (y.dim != estimates.dim()) throw Error("scp_recover: measurement dimension does not match the estimates");
  const int d = estimates.dim();
  const int n = estimates.num_agents();

  RecoveryResult result;
  BlockVector x(d, n);
  double slack = params.initial_slack;
  double previous_objective = 0.0;
  std::optional<BpdnState> warm;

  for (int k = 1; k <= params.max_iterations; ++k) {
    const Configuration current(estimates.positions() + x);
    const Eigen::VectorXd z = residual_vector(y, current, graph);
    const RigidityMatrix r = rigidity_matrix(y.kind, current, graph);

    const BpdnProblem problem{r.matrix, z, slack, x.values(), d};
    const BpdnSolution sol =
        solve_bpdn(problem, params.inner, params.warm_start && warm ? &*warm : nullptr);

    ScpIterate entry;
    entry.iteration = k;
    entry.slack = slack;
    entry.inner_iterations = sol.iterations;
    entry.primal_residual = sol.primal_residual;
    entry.dual_residual = sol.dual_residual;
    entry.inner_status = sol.status;
    result.iterations_used = k;

    if (sol.status == SolveStatus::infeasible) {
      entry.objective = block_norm(x, 1.0);
      result.trace.push_back(entry);
      result.status = ScpStatus::inner_failure;
      result.message = "step subproblem infeasible at iteration " + std::to_string(k) +
                       " (residual is " + std::to_string(sol.range_distance) + " from the range of R, slack " +
                       std::to_string(slack) + "); consider a larger initial slack";
      break;
    }

    x.values() += sol.step;
    warm = sol.state;
    entry.step_norm = sol.step.norm();
    entry.objective = block_norm(x, 1.0);
    if (k > 2 && entry.objective > previous_objective * (1.0 + 1e-9) + 1e-12) result.objective_increased = true;
    previous_objective = entry.objective;
    result.trace.push_back(entry);

    if (entry.step_norm < params.step_tolerance) {
      result.status = ScpStatus::converged;
      result.converged = true;
      break;
    }
    slack *= params.shrink;
  }

  result.x_star = x;
  result.support_threshold = params.support_threshold.value_or(default_support_threshold(x));
  result.support = identify_support(x, result.support_threshold);
  return result;
}

void write_trace_csv(std::ostream& out, const RecoveryResult& result) {
  out << "iteration,step_norm,slack,objective,inner_iterations,primal_residual,dual_residual,inner_status\n";
  out << std::setprecision(12);
  for (const auto& e : result.trace) {
    out << e.iteration << ',' << e.step_norm << ',' << e.slack << ',' << e.objective << ',' << e.inner_iterations
        << ',' << e.primal_residual << ',' << e.dual_residual << ',' << to_string(e.inner_status) << '\n';
  }
}

}  // namespace sparseloc
