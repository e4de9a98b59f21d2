// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparseloc/random.hpp"

namespace sparseloc {

namespace {

// Calls fn(subset) for every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  IndexSet idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    fn(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int m = pos + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
}

Eigen::MatrixXd column_blocks(const Eigen::MatrixXd& r, int d, const IndexSet& blocks) {
  Eigen::MatrixXd out(r.rows(), d * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t k = 0; k < blocks.size(); ++k) out.middleCols(d * k, d) = r.middleCols(d * blocks[k], d);
  return out;
}

}  // namespace

L0OracleResult brute_force_l0_recover(const Eigen::MatrixXd& r, int block_dim, const Eigen::VectorXd& z, int s_max) {
  if (block_dim <= 0 || r.cols() % block_dim != 0) throw Error("brute_force_l0_recover: bad block length");
  const int n = static_cast<int>(r.cols()) / block_dim;
  if (n > 12) throw Error("brute_force_l0_recover: more than 12 blocks");
  if (s_max < 0 || s_max > 4) throw Error("brute_force_l0_recover: s_max must lie in [0, 4]");
  if (z.size() != r.rows()) throw Error("brute_force_l0_recover: rhs length does not match the matrix");

  const double tol = 1e-8 * std::max(1.0, z.norm());
  const double sv_scale = r.size() > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()[0] : 0.0;
  L0OracleResult out;
  for (int k = 0; k <= std::min(s_max, n); ++k) {
    int fits = 0;
    bool deficient = false;
    for_each_subset(n, k, [&](const IndexSet& subset) {
      ++out.instances_examined;
      Eigen::VectorXd xs;
      double residual = z.norm();
      Eigen::Index rank = 0;
      if (k > 0) {
        const Eigen::MatrixXd a = column_blocks(r, block_dim, subset);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        cod.setThreshold(1e-10 * std::max(1.0, sv_scale) / std::max(1.0, static_cast<double>(a.cols())));
        xs = cod.solve(z);
        residual = (z - a * xs).norm();
        rank = cod.rank();
      }
      if (residual >= tol) return;
      ++fits;
      if (fits == 1) {
        out.x = Eigen::VectorXd::Zero(r.cols());
        for (int m = 0; m < k; ++m) out.x.segment(block_dim * subset[m], block_dim) = xs.segment(block_dim * m, block_dim);
        out.support = subset;
        deficient = rank < static_cast<Eigen::Index>(k) * block_dim;
      }
    });
    if (fits > 0) {
      out.unique = fits == 1 && !deficient;
      return out;
    }
  }
  throw Error("brute_force_l0_recover: no exact solution with at most " + std::to_string(s_max) + " blocks");
}

SparkOracleResult brute_force_block_spark(const Eigen::MatrixXd& r, int block_dim, int cap) {
  if (block_dim <= 0 || r.cols() % block_dim != 0) throw Error("brute_force_block_spark: bad block length");
  if (r.cols() > 24) throw Error("brute_force_block_spark: more than 24 columns");
  const int n = static_cast<int>(r.cols()) / block_dim;
  const double sv_scale = r.size() > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()[0] : 0.0;
  const double tol = 1e-9 * std::max(1.0, sv_scale);

  SparkOracleResult out;
  for (int k = 1; k <= std::min(cap, n); ++k) {
    bool found = false;
    for_each_subset(n, k, [&](const IndexSet& subset) {
      if (found) return;
      ++out.instances_examined;
      const Eigen::MatrixXd a = column_blocks(r, block_dim, subset);
      if (a.rows() < a.cols()) {
        found = true;
        return;
      }
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
      if (sv[sv.size() - 1] <= tol) found = true;
    });
    if (found) {
      out.spark = k;
      return out;
    }
  }
  return out;
}

NspOracleResult brute_force_nsp(const NullBasis& basis, int s, double q, long samples, std::uint64_t seed) {
  if (samples < 1) throw Error("brute_force_nsp: samples must be positive");
  if (!(q > 0.0 && q <= 1.0)) throw Error("brute_force_nsp: q must lie in (0, 1]");
  NspOracleResult out;
  const Eigen::MatrixXd b = basis.as_matrix();
  if (b.cols() == 0) return out;
  const int d = basis.dim;
  const int n = static_cast<int>(b.rows()) / d;
  if (s < 0 || s > n) throw Error("brute_force_nsp: s must lie in [0, |V|]");
  if (s == 0) {
    out.worst_vector = BlockVector(d, n);
    return out;
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  const Eigen::MatrixXd q_basis = qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());

  Rng rng(seed);
  Eigen::VectorXd coeff(b.cols());
  Eigen::VectorXd v(b.rows());
  std::vector<double> r(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  out.ratio = -1.0;
  for (long t = 0; t < samples; ++t) {
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff[k] = rng.normal();
    v.noalias() = q_basis * coeff;
    for (int i = 0; i < n; ++i) {
      const double norm = v.segment(d * i, d).norm();
      r[i] = q == 1.0 ? norm : std::pow(norm, q);
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + s, order.end(),
                      [&](int a, int c) { return r[a] > r[c] || (r[a] == r[c] && a < c); });
    double top = 0.0, total = 0.0;
    for (int i = 0; i < s; ++i) top += r[order[i]];
    for (double x : r) total += x;
    const double rest = total - top;
    const double ratio = rest > 0.0 ? top / rest : std::numeric_limits<double>::infinity();
    ++out.instances_examined;
    if (ratio > out.ratio) {
      out.ratio = ratio;
      out.worst_vector = BlockVector(d, v);
      out.worst_subset.assign(order.begin(), order.begin() + s);
      std::sort(out.worst_subset.begin(), out.worst_subset.end());
    }
  }
  return out;
}

}  // namespace sparseloc
