// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "sparseloc/core_model.hpp"
#include "sparseloc/measurement.hpp"

namespace sparseloc {

/// Jacobian of the measurement map. Row block k (1 row for distance, dim rows
/// for bearing) belongs to edges[k]; column block i belongs to agent i.
struct RigidityMatrix {
  MeasurementKind kind = MeasurementKind::distance;
  int dim = 0;
  int num_agents = 0;
  std::vector<Edge> edges;
  Eigen::MatrixXd matrix;

  int rows_per_edge() const { return sparseloc::rows_per_edge(kind, dim); }
};

RigidityMatrix distance_rigidity_matrix(const Configuration& cfg, const SensorGraph& graph);

/// Exact Jacobian of bearing_measurements: P_ij / |p_i - p_j| at block i and
/// its negative at block j.
RigidityMatrix bearing_rigidity_matrix(const Configuration& cfg, const SensorGraph& graph);

RigidityMatrix rigidity_matrix(MeasurementKind kind, const Configuration& cfg, const SensorGraph& graph);

/// I - u u^T / |u|^2, the projector onto the complement of `diff`.
Eigen::MatrixXd orthogonal_projector(const Eigen::VectorXd& diff);

/// Analytic generators of the trivial motions: translations plus rotations
/// (distance) or translations plus scaling (bearing).
struct NullBasis {
  MeasurementKind kind = MeasurementKind::distance;
  int dim = 0;
  std::vector<BlockVector> vectors;

  /// Basis vectors as columns.
  Eigen::MatrixXd as_matrix() const;
};

NullBasis analytic_null_basis(const Configuration& cfg, MeasurementKind kind);

/// d|V| - C(d+1, 2) for distance, d|V| - d - 1 for bearing (never below 0).
int maximal_rank(MeasurementKind kind, int dim, int num_agents);

struct RigidityReport {
  int rank = 0;
  int nullity = 0;
  int maximal_rank = 0;
  bool is_infinitesimally_rigid = false;
  /// Smallest eigenvalue of R^T R above the rank tolerance (0 if rank is 0).
  double worst_case_index = 0.0;
  /// Eigenvalues of R^T R, ascending.
  std::vector<double> eigenvalues;
};

/// Numerical rank with tolerance max(rows, cols) * eps * sigma_max.
RigidityReport rigidity_report(const RigidityMatrix& r);

/// Row-major CSV with a leading comment header `# kind=...,agents=...,edges=...`.
void write_rigidity_csv(std::ostream& out, const RigidityMatrix& r);

}  // namespace sparseloc
