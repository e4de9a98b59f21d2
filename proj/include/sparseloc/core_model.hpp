// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sparseloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted, duplicate-free list of agent indices.
using IndexSet = std::vector<int>;

struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected measurement graph. Edges are stored as given; use normalized()
/// to obtain the canonical i<j, sorted, duplicate-free form.
struct SensorGraph {
  int num_agents = 0;
  std::vector<Edge> edges;

  int num_edges() const { return static_cast<int>(edges.size()); }
  SensorGraph normalized() const;
};

/// Stacked vector of |V| blocks, each of length dim.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(int dim, int num_blocks);
  BlockVector(int dim, Eigen::VectorXd values);

  int dim() const { return dim_; }
  int num_blocks() const { return dim_ == 0 ? 0 : static_cast<int>(values_.size()) / dim_; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  auto block(int i) const { return values_.segment(i * dim_, dim_); }
  auto block(int i) { return values_.segment(i * dim_, dim_); }

  double block_norm(int i) const { return block(i).norm(); }
  Eigen::VectorXd block_norms() const;

  BlockVector operator+(const BlockVector& other) const;
  BlockVector operator-(const BlockVector& other) const;

 private:
  int dim_ = 0;
  Eigen::VectorXd values_;
};

/// Agent positions in R^dim, dim in {2, 3}.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(BlockVector positions);
  Configuration(int dim, const std::vector<std::vector<double>>& points);

  int dim() const { return positions_.dim(); }
  int num_agents() const { return positions_.num_blocks(); }
  const BlockVector& positions() const { return positions_; }
  auto position(int i) const { return positions_.block(i); }

  /// Largest pairwise distance.
  double diameter() const;

 private:
  BlockVector positions_;
};

/// Estimates p_hat, true error x = p - p_hat and the faulty set D.
struct ErrorState {
  BlockVector estimates;
  BlockVector true_error;
  IndexSet fault_set;
};

struct NetworkInstance {
  Configuration config;
  SensorGraph graph;
};

inline constexpr double kCoincidenceTolerance = 1e-9;

enum class IssueKind { bad_dimension, coincident_positions, self_loop, index_out_of_range, duplicate_edge };

struct ValidationIssue {
  IssueKind kind;
  int first = -1;
  int second = -1;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  bool has(IssueKind kind) const;
};

ValidationReport validate_configuration(const Configuration& cfg, const SensorGraph& graph);

/// Throws Error listing the issues if the report is not ok.
void require_valid(const Configuration& cfg, const SensorGraph& graph);

/// Mixed l2/lq norm. q = 0 counts non-zero blocks, q = inf is the max block
/// norm, q in (0,1) returns the quasi-norm (sum |b|^q)^(1/q).
double block_norm(const BlockVector& v, double q);

/// A block counts as non-zero iff its norm exceeds 1e-9 * (1 + max block norm).
double zero_block_tolerance(const BlockVector& v);

BlockVector restrict_support(const BlockVector& v, const IndexSet& support);
IndexSet complement(const IndexSet& support, int num_agents);

NetworkInstance random_geometric_network(int n, int dim, double radius, double box, std::uint64_t seed);

/// Orthonormal basis (columns) of the plane orthogonal to a unit normal.
/// Gram-Schmidt against the canonical axis least aligned with the normal.
Eigen::Matrix<double, 3, 2> plane_basis(const Eigen::Vector3d& normal);

Configuration project_to_plane(const Configuration& cfg, const Eigen::Vector3d& normal);

}  // namespace sparseloc
