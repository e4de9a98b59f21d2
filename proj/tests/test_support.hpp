// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

// Reference computations shared by the unit and acceptance suites. Nothing in
// here calls the code path it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "sparseloc/core_model.hpp"
#include "sparseloc/harness.hpp"
#include "sparseloc/measurement.hpp"
#include "sparseloc/random.hpp"
#include "sparseloc/rigidity.hpp"

namespace sparseloc::testing {

/// Central-difference Jacobian of the measurement map.
inline Eigen::MatrixXd finite_difference_jacobian(MeasurementKind kind, const Configuration& cfg,
                                                  const SensorGraph& graph, double step) {
  const Eigen::VectorXd p = cfg.positions().values();
  const int d = cfg.dim();
  const Eigen::Index rows = measure(kind, cfg, graph).values.size();
  Eigen::MatrixXd jac(rows, p.size());
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    Eigen::VectorXd plus = p, minus = p;
    plus[c] += step;
    minus[c] -= step;
    const Eigen::VectorXd fp = measure(kind, Configuration(BlockVector(d, plus)), graph).values;
    const Eigen::VectorXd fm = measure(kind, Configuration(BlockVector(d, minus)), graph).values;
    jac.col(c) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

/// Characteristic polynomial coefficients c_0..c_n of a square matrix,
/// det(lambda I - A) = sum c_k lambda^k, by the Faddeev-LeVerrier recursion.
inline std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[n] = 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[n - k + 1] * Eigen::MatrixXd::Identity(n, n);
    c[n - k] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

inline double polyval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

/// Smallest root above `floor` of a polynomial whose roots are all real and
/// non-negative (a Gram matrix), by scanning for a sign change then bisecting.
inline double smallest_root_above(const std::vector<double>& c, double floor, double upper) {
  const int scan = 200000;
  double lo = floor, flo = polyval(c, lo);
  for (int k = 1; k <= scan; ++k) {
    const double hi = floor + (upper - floor) * k / scan;
    const double fhi = polyval(c, hi);
    if ((flo < 0) != (fhi < 0)) {
      double a = lo, b = hi;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if ((polyval(c, mid) < 0) == (flo < 0)) a = mid; else b = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    flo = fhi;
  }
  return std::nan("");
}

/// Rigid random network: uniform positions in [0, box]^dim, redrawn until rigid.
inline NetworkInstance rigid_network(int n, int dim, double radius, double box, std::uint64_t seed,
                                     MeasurementKind kind) {
  NetworkSource src;
  src.kind = NetworkSourceKind::generated;
  src.n = n;
  src.dim = dim;
  src.radius = radius;
  src.box = box;
  src.seed = seed;
  return build_network(src, kind);
}

inline SensorGraph complete_graph(int n) {
  SensorGraph g{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j});
  return g;
}

inline Eigen::MatrixXd columns(const Configuration& cfg) {
  Eigen::MatrixXd out(cfg.dim(), cfg.num_agents());
  for (int i = 0; i < cfg.num_agents(); ++i) out.col(i) = cfg.position(i);
  return out;
}

/// sum over the rest minus sum over the s furthest of |p_i - c|^q, written out
/// with a full sort.
inline double direct_margin(const Eigen::MatrixXd& pts, const Eigen::VectorXd& c, int s, double q) {
  std::vector<double> r;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) r.push_back(std::pow((pts.col(k) - c).norm(), q));
  std::sort(r.begin(), r.end(), std::greater<>());
  double top = 0.0, rest = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) (static_cast<int>(k) < s ? top : rest) += r[k];
  return rest - top;
}

/// Minimum of direct_margin over a uniform grid on [lo, hi]^2.
inline double dense_grid_margin(const Eigen::MatrixXd& pts, int s, double q, double lo, double hi, int per_axis) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd c(2);
  for (int a = 0; a < per_axis; ++a) {
    for (int b = 0; b < per_axis; ++b) {
      c << lo + (hi - lo) * a / (per_axis - 1), lo + (hi - lo) * b / (per_axis - 1);
      best = std::min(best, direct_margin(pts, c, s, q));
    }
  }
  return best;
}

}  // namespace sparseloc::testing
