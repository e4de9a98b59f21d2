// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sparseloc/core_model.hpp"
#include "sparseloc/measurement.hpp"

namespace sparseloc {

/// Proximal map of lambda * ||.||_{2,1}: each block b -> max(0, 1 - lambda/|b|) b.
BlockVector group_soft_threshold(const BlockVector& v, double lambda);

/// min ||w0 + x||_{2,1}  s.t.  ||b - R x||_2 <= slack.
struct BpdnProblem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  double slack = 0.0;
  /// Empty means zero.
  Eigen::VectorXd offset;
  int block_dim = 1;
};

struct BpdnOptions {
  /// Primal and dual residual tolerance, relative to max(1, problem scale).
  double tolerance = 1e-8;
  int max_iterations = 100000;
  double initial_penalty = 1.0;
  int rebalance_every = 50;
  /// Slack used when the requested slack is below it (equality-constrained case).
  double slack_floor = 1e-9;
};

enum class SolveStatus { converged, iteration_limit, infeasible };

std::string_view to_string(SolveStatus status);

/// ADMM iterate; pass back in to warm-start a related problem. All vectors are
/// in the shifted variable w = offset + x.
struct BpdnState {
  Eigen::VectorXd w;
  Eigen::VectorXd u;
  Eigen::VectorXd t;
  Eigen::VectorXd scaled_dual_w;
  Eigen::VectorXd scaled_dual_t;
  double penalty = 1.0;
};

struct BpdnSolution {
  /// Minimizer x (the step, excluding the offset).
  Eigen::VectorXd step;
  /// offset + step, the vector whose block norm is minimized.
  Eigen::VectorXd shifted;
  /// Dual certificate nu, parallel to R w - b'. Its image R^T nu equals
  /// -w_i/|w_i| on non-zero blocks and has block norm <= 1 elsewhere.
  Eigen::VectorXd dual;
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Distance from b' to range(R); the problem is infeasible if it exceeds the slack.
  double range_distance = 0.0;
  double effective_slack = 0.0;
  BpdnState state;
};

BpdnSolution solve_bpdn(const BpdnProblem& problem, const BpdnOptions& options = {},
                        const BpdnState* warm_start = nullptr);

/// {i : |x[i]| > threshold}.
IndexSet identify_support(const BlockVector& x, double threshold);

/// 1e-3 * max(1, max block norm).
double default_support_threshold(const BlockVector& x);

struct ScpParams {
  int max_iterations = 20;
  double initial_slack = 4.0;
  /// Slack multiplier per iteration, in (0, 1].
  double shrink = 1.0 / 3.0;
  double step_tolerance = 1e-6;
  BpdnOptions inner;
  /// Absolute support threshold; default_support_threshold when unset.
  std::optional<double> support_threshold;
  bool warm_start = true;

  void validate() const;
};

/// Accepts a shrink factor in (0, 1] as is, and a reduction ratio > 1 as its
/// reciprocal (3.0 -> 1/3).
double normalize_shrink(double value);

struct ScpIterate {
  int iteration = 0;
  double step_norm = 0.0;
  double slack = 0.0;
  double objective = 0.0;
  int inner_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SolveStatus inner_status = SolveStatus::converged;
};

enum class ScpStatus { converged, iteration_limit, inner_failure };

std::string_view to_string(ScpStatus status);

struct RecoveryResult {
  BlockVector x_star;
  IndexSet support;
  double support_threshold = 0.0;
  int iterations_used = 0;
  std::vector<ScpIterate> trace;
  ScpStatus status = ScpStatus::iteration_limit;
  bool converged = false;
  /// Set when ||x_k||_{2,1} increased between iterations after the first.
  bool objective_increased = false;
  std::string message;
};

/// Sequential convex programming loop: relinearize at p_hat + x_{k-1}, solve
/// the block BPDN step with slack eps_{k-1}, stop when the step norm drops
/// below the tolerance, otherwise shrink the slack.
RecoveryResult scp_recover(const Configuration& estimates, const MeasurementSet& y, const SensorGraph& graph,
                           const ScpParams& params);

/// iteration,step_norm,slack,objective,inner_iterations,primal_residual,dual_residual,inner_status
void write_trace_csv(std::ostream& out, const RecoveryResult& result);

}  // namespace sparseloc
