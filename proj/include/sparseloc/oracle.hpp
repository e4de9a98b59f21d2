// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "sparseloc/core_model.hpp"
#include "sparseloc/rigidity.hpp"

namespace sparseloc {

// Exhaustive references for small instances. Guards throw rather than
// silently truncating the search.

struct L0OracleResult {
  Eigen::VectorXd x;
  IndexSet support;
  /// No other support of the same size fits, and the fit on `support` is unique.
  bool unique = false;
  long instances_examined = 0;
};

/// Sparsest exact solution of R x = z over supports of size 0..s_max
/// (residual < 1e-8 * max(1, |z|)). Requires at most 12 blocks and s_max <= 4.
L0OracleResult brute_force_l0_recover(const Eigen::MatrixXd& r, int block_dim, const Eigen::VectorXd& z, int s_max);

struct SparkOracleResult {
  /// Smallest number of non-zero blocks of a kernel vector, if at most `cap`.
  std::optional<int> spark;
  long instances_examined = 0;
};

/// Requires at most 24 columns.
SparkOracleResult brute_force_block_spark(const Eigen::MatrixXd& r, int block_dim, int cap);

struct NspOracleResult {
  /// Largest sampled sum_S |v_i|^q / sum_{S^c} |v_i|^q with S the s largest blocks.
  double ratio = 0.0;
  BlockVector worst_vector;
  IndexSet worst_subset;
  long instances_examined = 0;
};

/// Samples Gaussian coordinates in an orthonormalized copy of the basis.
NspOracleResult brute_force_nsp(const NullBasis& basis, int s, double q, long samples, std::uint64_t seed);

}  // namespace sparseloc
