// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "sparseloc/random.hpp"

namespace sparseloc {

// ---------------------------------------------------------------------------
// random.hpp

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base ^ (index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::below(int n) {
  if (n <= 0) throw Error("Rng::below: n must be positive");
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<int>(draw % range);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k < 0 || k > n) throw Error("sample_without_replacement: k out of range");
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  // partial Fisher-Yates
  for (int i = 0; i < k; ++i) {
    const int j = i + below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// ---------------------------------------------------------------------------

SensorGraph SensorGraph::normalized() const {
  SensorGraph out{num_agents, {}};
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    const int a = std::min(e.i, e.j);
    const int b = std::max(e.i, e.j);
    if (seen.emplace(a, b).second) out.edges.push_back({a, b});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const Edge& l, const Edge& r) { return std::tie(l.i, l.j) < std::tie(r.i, r.j); });
  return out;
}

BlockVector::BlockVector(int dim, int num_blocks) : dim_(dim), values_(Eigen::VectorXd::Zero(dim * num_blocks)) {
  if (dim <= 0 || num_blocks < 0) throw Error("BlockVector: invalid shape");
}

BlockVector::BlockVector(int dim, Eigen::VectorXd values) : dim_(dim), values_(std::move(values)) {
  if (dim <= 0) throw Error("BlockVector: block length must be positive");
  if (values_.size() % dim != 0) {
    throw Error("BlockVector: length " + std::to_string(values_.size()) + " is not a multiple of " +
                std::to_string(dim));
  }
}

Eigen::VectorXd BlockVector::block_norms() const {
  Eigen::VectorXd norms(num_blocks());
  for (int i = 0; i < num_blocks(); ++i) norms[i] = block_norm(i);
  return norms;
}

BlockVector BlockVector::operator+(const BlockVector& other) const {
  if (other.dim_ != dim_ || other.values_.size() != values_.size()) throw Error("BlockVector: shape mismatch");
  return BlockVector(dim_, values_ + other.values_);
}

BlockVector BlockVector::operator-(const BlockVector& other) const {
  if (other.dim_ != dim_ || other.values_.size() != values_.size()) throw Error("BlockVector: shape mismatch");
  return BlockVector(dim_, values_ - other.values_);
}

Configuration::Configuration(BlockVector positions) : positions_(std::move(positions)) {
  if (positions_.dim() != 2 && positions_.dim() != 3) {
    throw Error("Configuration: dimension must be 2 or 3, got " + std::to_string(positions_.dim()));
  }
}

Configuration::Configuration(int dim, const std::vector<std::vector<double>>& points) {
  Eigen::VectorXd values(dim * static_cast<int>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(points[i].size()) != dim) {
      throw Error("Configuration: position " + std::to_string(i) + " has " + std::to_string(points[i].size()) +
                  " coordinates, expected " + std::to_string(dim));
    }
    for (int m = 0; m < dim; ++m) values[static_cast<int>(i) * dim + m] = points[i][m];
  }
  *this = Configuration(BlockVector(dim, std::move(values)));
}

double Configuration::diameter() const {
  double best = 0.0;
  for (int i = 0; i < num_agents(); ++i)
    for (int j = i + 1; j < num_agents(); ++j) best = std::max(best, (position(i) - position(j)).norm());
  return best;
}

bool ValidationReport::has(IssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(), [kind](const ValidationIssue& x) { return x.kind == kind; });
}

ValidationReport validate_configuration(const Configuration& cfg, const SensorGraph& graph) {
  ValidationReport report;
  auto flag = [&](IssueKind kind, int a, int b, std::string msg) {
    report.ok = false;
    report.issues.push_back({kind, a, b, std::move(msg)});
  };

  if (cfg.dim() != 2 && cfg.dim() != 3) flag(IssueKind::bad_dimension, -1, -1, "dimension must be 2 or 3");
  if (graph.num_agents != cfg.num_agents()) {
    flag(IssueKind::index_out_of_range, graph.num_agents, cfg.num_agents(),
         "graph has " + std::to_string(graph.num_agents) + " agents, configuration has " +
             std::to_string(cfg.num_agents()));
  }

  for (int i = 0; i < cfg.num_agents(); ++i) {
    for (int j = i + 1; j < cfg.num_agents(); ++j) {
      if ((cfg.position(i) - cfg.position(j)).norm() <= kCoincidenceTolerance) {
        flag(IssueKind::coincident_positions, i, j, "coincident positions");
      }
    }
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& e : graph.edges) {
    if (e.i == e.j) flag(IssueKind::self_loop, e.i, e.j, "self-loop");
    if (e.i < 0 || e.j < 0 || e.i >= cfg.num_agents() || e.j >= cfg.num_agents()) {
      flag(IssueKind::index_out_of_range, e.i, e.j, "index out of range");
    }
    if (!seen.emplace(std::min(e.i, e.j), std::max(e.i, e.j)).second) {
      flag(IssueKind::duplicate_edge, e.i, e.j, "duplicate edge");
    }
  }
  return report;
}

void require_valid(const Configuration& cfg, const SensorGraph& graph) {
  const auto report = validate_configuration(cfg, graph);
  if (report.ok) return;
  std::ostringstream os;
  os << "invalid network:";
  for (const auto& issue : report.issues) os << " [" << issue.message << " " << issue.first << "," << issue.second << "]";
  throw Error(os.str());
}

double zero_block_tolerance(const BlockVector& v) {
  const double max_norm = v.num_blocks() > 0 ? v.block_norms().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + max_norm);
}

double block_norm(const BlockVector& v, double q) {
  if (!(q >= 0.0)) throw Error("block_norm: q must be non-negative");
  const Eigen::VectorXd norms = v.block_norms();
  if (norms.size() == 0) return 0.0;
  if (q == 0.0) {
    const double tol = zero_block_tolerance(v);
    return static_cast<double>((norms.array() > tol).count());
  }
  if (std::isinf(q)) return norms.maxCoeff();
  if (q == 1.0) return norms.sum();
  return std::pow(norms.array().pow(q).sum(), 1.0 / q);
}

BlockVector restrict_support(const BlockVector& v, const IndexSet& support) {
  BlockVector out(v.dim(), v.num_blocks());
  for (int i : support) {
    if (i < 0 || i >= v.num_blocks()) throw Error("restrict_support: index " + std::to_string(i) + " out of range");
    out.block(i) = v.block(i);
  }
  return out;
}

IndexSet complement(const IndexSet& support, int num_agents) {
  std::vector<bool> in(num_agents, false);
  for (int i : support) {
    if (i < 0 || i >= num_agents) throw Error("complement: index out of range");
    in[i] = true;
  }
  IndexSet out;
  for (int i = 0; i < num_agents; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

NetworkInstance random_geometric_network(int n, int dim, double radius, double box, std::uint64_t seed) {
  if (dim != 2 && dim != 3) throw Error("random_geometric_network: dim must be 2 or 3");
  if (n < 2) throw Error("random_geometric_network: need at least 2 agents");
  if (!(radius > 0.0)) throw Error("random_geometric_network: radius must be positive");
  if (!(box > 0.0)) throw Error("random_geometric_network: box must be positive");

  Rng rng(seed);
  Eigen::VectorXd values(n * dim);
  for (int k = 0; k < n * dim; ++k) values[k] = rng.uniform(0.0, box);
  Configuration cfg(BlockVector(dim, std::move(values)));

  SensorGraph graph{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((cfg.position(i) - cfg.position(j)).norm() <= radius) graph.edges.push_back({i, j});
  return {std::move(cfg), std::move(graph)};
}

Eigen::Matrix<double, 3, 2> plane_basis(const Eigen::Vector3d& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-12) {
    if (normal.norm() == 0.0) throw Error("plane_basis: zero normal");
    throw Error("plane_basis: normal must have unit length");
  }
  int axis = 0;
  normal.cwiseAbs().minCoeff(&axis);
  Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
  Eigen::Vector3d u = e - normal.dot(e) * normal;
  u.normalize();
  const Eigen::Vector3d w = normal.cross(u);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = u;
  basis.col(1) = w;
  return basis;
}

Configuration project_to_plane(const Configuration& cfg, const Eigen::Vector3d& normal) {
  if (cfg.dim() != 3) throw Error("project_to_plane: configuration must be 3-dimensional");
  const auto basis = plane_basis(normal);
  Eigen::VectorXd values(2 * cfg.num_agents());
  for (int i = 0; i < cfg.num_agents(); ++i) {
    values.segment<2>(2 * i) = basis.transpose() * cfg.position(i);
  }
  return Configuration(BlockVector(2, std::move(values)));
}

}  // namespace sparseloc
