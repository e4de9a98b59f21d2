// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/rigidity.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>

namespace sparseloc {

RigidityMatrix distance_rigidity_matrix(const Configuration& cfg, const SensorGraph& graph) {
  const int d = cfg.dim();
  RigidityMatrix r{MeasurementKind::distance, d, cfg.num_agents(), graph.edges,
                   Eigen::MatrixXd::Zero(graph.num_edges(), d * cfg.num_agents())};
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edges[k];
    const Eigen::VectorXd diff = cfg.position(e.i) - cfg.position(e.j);
    r.matrix.block(k, d * e.i, 1, d) = diff.transpose();
    r.matrix.block(k, d * e.j, 1, d) = -diff.transpose();
  }
  return r;
}

Eigen::MatrixXd orthogonal_projector(const Eigen::VectorXd& diff) {
  const double sq = diff.squaredNorm();
  if (sq == 0.0) throw Error("orthogonal_projector: zero vector");
  const auto d = diff.size();
  return Eigen::MatrixXd::Identity(d, d) - diff * diff.transpose() / sq;
}

RigidityMatrix bearing_rigidity_matrix(const Configuration& cfg, const SensorGraph& graph) {
  const int d = cfg.dim();
  RigidityMatrix r{MeasurementKind::bearing, d, cfg.num_agents(), graph.edges,
                   Eigen::MatrixXd::Zero(d * graph.num_edges(), d * cfg.num_agents())};
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edges[k];
    const Eigen::VectorXd diff = cfg.position(e.i) - cfg.position(e.j);
    const double len = diff.norm();
    if (len <= kCoincidenceTolerance) {
      throw Error("degenerate edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + "): coincident endpoints");
    }
    const Eigen::MatrixXd block = orthogonal_projector(diff) / len;
    r.matrix.block(d * k, d * e.i, d, d) = block;
    r.matrix.block(d * k, d * e.j, d, d) = -block;
  }
  return r;
}

RigidityMatrix rigidity_matrix(MeasurementKind kind, const Configuration& cfg, const SensorGraph& graph) {
  return kind == MeasurementKind::distance ? distance_rigidity_matrix(cfg, graph) : bearing_rigidity_matrix(cfg, graph);
}

Eigen::MatrixXd NullBasis::as_matrix() const {
  if (vectors.empty()) return {};
  Eigen::MatrixXd out(vectors.front().values().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = vectors[c].values();
  return out;
}

namespace {

// Skew-symmetric generators of so(d). For d = 3 the order and signs follow the
// basis {e1^e2, e1^e3, -(e2^e3)} used for the rotation parametrization.
std::vector<Eigen::MatrixXd> skew_generators(int d) {
  std::vector<Eigen::MatrixXd> out;
  if (d == 2) {
    Eigen::MatrixXd s(2, 2);
    s << 0, 1, -1, 0;
    out.push_back(s);
  } else {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3), b = a, c = a;
    a(0, 1) = 1;
    a(1, 0) = -1;
    b(0, 2) = 1;
    b(2, 0) = -1;
    c(1, 2) = -1;
    c(2, 1) = 1;
    out = {a, b, c};
  }
  return out;
}

}  // namespace

NullBasis analytic_null_basis(const Configuration& cfg, MeasurementKind kind) {
  const int d = cfg.dim();
  const int n = cfg.num_agents();
  NullBasis basis{kind, d, {}};
  for (int m = 0; m < d; ++m) {
    BlockVector t(d, n);
    for (int i = 0; i < n; ++i) t.block(i)[m] = 1.0;
    basis.vectors.push_back(std::move(t));
  }
  if (kind == MeasurementKind::distance) {
    for (const auto& s : skew_generators(d)) {
      BlockVector rot(d, n);
      for (int i = 0; i < n; ++i) rot.block(i) = s * cfg.position(i);
      basis.vectors.push_back(std::move(rot));
    }
  } else {
    basis.vectors.push_back(cfg.positions());
  }
  return basis;
}

int maximal_rank(MeasurementKind kind, int dim, int num_agents) {
  const int trivial = kind == MeasurementKind::distance ? dim * (dim + 1) / 2 : dim + 1;
  return std::max(0, dim * num_agents - trivial);
}

RigidityReport rigidity_report(const RigidityMatrix& r) {
  RigidityReport report;
  const auto cols = r.matrix.cols();
  report.maximal_rank = maximal_rank(r.kind, r.dim, r.num_agents);
  if (cols == 0) return report;

  int rank = 0;
  if (r.matrix.rows() > 0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r.matrix);
    const auto& sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(r.matrix.rows(), cols)) *
                       std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv[0] : 0.0);
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv[k] > tol) ++rank;
  }
  report.rank = rank;
  report.nullity = static_cast<int>(cols) - rank;
  report.is_infinitesimally_rigid = rank == report.maximal_rank;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.matrix.transpose() * r.matrix, Eigen::EigenvaluesOnly);
  const auto& values = eig.eigenvalues();
  report.eigenvalues.assign(values.data(), values.data() + values.size());
  if (rank > 0) report.worst_case_index = values[report.nullity];
  return report;
}

void write_rigidity_csv(std::ostream& out, const RigidityMatrix& r) {
  out << "# kind=" << to_string(r.kind) << ",dim=" << r.dim << ",agents=" << r.num_agents
      << ",edges=" << r.edges.size() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index row = 0; row < r.matrix.rows(); ++row) {
    for (Eigen::Index c = 0; c < r.matrix.cols(); ++c) {
      if (c > 0) out << ',';
      const double v = r.matrix(row, c);
      out << (v == 0.0 ? 0.0 : v);
    }
    out << '\n';
  }
}

}  // namespace sparseloc
