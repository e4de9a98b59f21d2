// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/recoverability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparseloc/search.hpp"

namespace sparseloc {

std::string_view to_string(NspVerdict verdict) {
  switch (verdict) {
    case NspVerdict::holds:
      return "holds";
    case NspVerdict::violated:
      return "violated";
    case NspVerdict::undecided:
      return "undecided";
  }
  return "unknown";
}

nlohmann::json to_json(const SearchBudget& b) {
  return {{"grid_points", b.grid_points},         {"grid_points_3d", b.grid_points_3d},
          {"expansion", b.expansion},             {"refine_iterations", b.refine_iterations},
          {"refine_starts", b.refine_starts},     {"plane_count", b.plane_count},
          {"plane_refine", b.plane_refine}};
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Eigen::MatrixXd as_columns(const Configuration& cfg) {
  const Eigen::VectorXd& v = cfg.positions().values();
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), cfg.dim(), cfg.num_agents());
}

double powq(double r, double q) { return q == 1.0 ? r : std::pow(r, q); }

// Indices of the s largest entries, ties to the lower index, sorted ascending.
IndexSet top_indices(const std::vector<double>& r, int s) {
  std::vector<int> order(r.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r[a] > r[b]; });
  IndexSet out(order.begin(), order.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

// (sum of s largest, total) of r.
std::pair<double, double> top_and_total(std::vector<double>& r, int s) {
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  if (s <= 0) return {0.0, total};
  std::nth_element(r.begin(), r.begin() + (s - 1), r.end(), std::greater<>());
  const double top = std::accumulate(r.begin(), r.begin() + s, 0.0);
  return {top, total};
}

struct Box {
  Eigen::VectorXd lo, hi;
};

Box search_box(const Eigen::MatrixXd& points, double expansion) {
  const Eigen::VectorXd lo = points.rowwise().minCoeff();
  const Eigen::VectorXd hi = points.rowwise().maxCoeff();
  double diam = 0.0;
  for (Eigen::Index a = 0; a < points.cols(); ++a)
    for (Eigen::Index b = a + 1; b < points.cols(); ++b) diam = std::max(diam, (points.col(a) - points.col(b)).norm());
  if (diam == 0.0) diam = 1.0;
  const double pad = expansion * diam;
  return {lo.array() - pad, hi.array() + pad};
}

std::vector<Eigen::VectorXd> column_seeds(const Eigen::MatrixXd& points) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index k = 0; k < points.cols(); ++k) out.emplace_back(points.col(k));
  return out;
}

struct MarginSearch {
  SearchPoint best;
  double scale = 0.0;
};

MarginSearch minimize_margin(const Eigen::MatrixXd& points, int s, double q, int per_axis,
                             const SearchBudget& budget) {
  const Box box = search_box(points, budget.expansion);
  const Objective f = [&](const Eigen::VectorXd& c) { return nsp_margin(points, c, s, q); };
  const GridRefineOptions opts{per_axis, budget.refine_starts, budget.refine_iterations};
  MarginSearch out;
  out.best = grid_refine_minimize(f, box.lo, box.hi, column_seeds(points), opts);
  for (Eigen::Index k = 0; k < points.cols(); ++k) out.scale += powq((points.col(k) - out.best.x).norm(), q);
  return out;
}

NspVerdict verdict_for(double margin, double scale) {
  if (margin <= 0.0) return NspVerdict::violated;
  if (margin <= 1e-9 * std::max(1.0, scale)) return NspVerdict::undecided;
  return NspVerdict::holds;
}

void check_arguments(int n, int s, double q) {
  if (s < 0) throw Error("nsp check: s must be non-negative");
  if (!(q > 0.0 && q <= 1.0)) throw Error("nsp check: q must lie in (0, 1]");
  if (n < 1) throw Error("nsp check: empty configuration");
}

// Returns true (and fills cert) when the level is decided without a search.
bool trivial_level(NspCertificate& cert, int n) {
  if (cert.s == 0) {
    cert.verdict = NspVerdict::holds;
    cert.margin = std::numeric_limits<double>::infinity();
    cert.note = "s = 0 holds trivially";
    return true;
  }
  if (2 * cert.s >= n) {
    cert.verdict = NspVerdict::violated;
    cert.margin = static_cast<double>(n - 2 * cert.s);
    cert.note = "s >= |V|/2: a pure translation violates the property";
    return true;
  }
  return false;
}

NspCertificate planar_check(const Eigen::MatrixXd& points, MeasurementKind kind, int dim, int s, double q,
                            const SearchBudget& budget) {
  const int n = static_cast<int>(points.cols());
  check_arguments(n, s, q);
  NspCertificate cert;
  cert.kind = kind;
  cert.dim = dim;
  cert.s = s;
  cert.q = q;
  cert.budget = budget;
  if (trivial_level(cert, n)) return cert;

  const int per_axis = points.rows() == 3 ? budget.grid_points_3d : budget.grid_points;
  const MarginSearch m = minimize_margin(points, s, q, per_axis, budget);
  cert.witness_c = m.best.x;
  nsp_margin(points, m.best.x, s, q, &cert.witness_subset);
  cert.margin = m.best.value;
  cert.verdict = verdict_for(cert.margin, m.scale);
  return cert;
}

// Perpendicular distances of the columns of `points` to the line through c along n.
double axis_margin(const Eigen::MatrixXd& points, const Eigen::Vector3d& n, const Eigen::Vector3d& c, int s, double q,
                   IndexSet* furthest) {
  const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - n * n.transpose();
  std::vector<double> r(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index k = 0; k < points.cols(); ++k) r[k] = powq((proj * (points.col(k) - c)).norm(), q);
  if (furthest) *furthest = top_indices(r, s);
  const auto [top, total] = top_and_total(r, s);
  return total - 2.0 * top;
}

}  // namespace

nlohmann::json to_json(const NspCertificate& c) {
  nlohmann::json out = {{"kind", to_string(c.kind)},
                        {"dim", c.dim},
                        {"s", c.s},
                        {"q", c.q},
                        {"holds", to_string(c.verdict)},
                        {"witness_c", vector_json(c.witness_c)},
                        {"witness_subset", c.witness_subset},
                        {"margin", std::isfinite(c.margin) ? nlohmann::json(c.margin) : nlohmann::json(nullptr)},
                        {"search_budget", to_json(c.budget)}};
  if (c.witness_normal.size() > 0) out["witness_normal"] = vector_json(c.witness_normal);
  if (!c.note.empty()) out["note"] = c.note;
  return out;
}

double nsp_margin(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, int s, double q, IndexSet* furthest) {
  std::vector<double> r(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index k = 0; k < points.cols(); ++k) r[k] = powq((points.col(k) - c).norm(), q);
  if (furthest) *furthest = top_indices(r, s);
  const auto [top, total] = top_and_total(r, s);
  return total - 2.0 * top;
}

int max_colinear_count(const Configuration& cfg, double tol) {
  const int n = cfg.num_agents();
  if (n < 3) return n;
  if (tol < 0.0) tol = 1e-6 * cfg.diameter();
  int best = 2;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const Eigen::VectorXd u0 = cfg.position(b) - cfg.position(a);
      const double len = u0.norm();
      if (len <= kCoincidenceTolerance) continue;
      const Eigen::VectorXd u = u0 / len;
      int count = 0;
      for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd w = cfg.position(k) - cfg.position(a);
        if ((w - w.dot(u) * u).norm() <= tol) ++count;
      }
      best = std::max(best, count);
    }
  }
  return best;
}

int l0_recovery_limit(int num_agents, MeasurementKind kind, int dim, int s_tilde) {
  if (kind == MeasurementKind::bearing || dim == 2) s_tilde = 1;
  const int gap = num_agents - s_tilde;
  if (gap <= 0) return 0;
  // largest integer strictly below gap/2
  return std::max(0, (gap + 1) / 2 - 1);
}

NspCertificate nsp_check_2d(const Configuration& cfg, int s, double q, const SearchBudget& budget) {
  if (cfg.dim() != 2) throw Error("nsp_check_2d: configuration must be planar");
  return planar_check(as_columns(cfg), MeasurementKind::distance, 2, s, q, budget);
}

NspCertificate nsp_check_bearing(const Configuration& cfg, int s, double q, const SearchBudget& budget) {
  NspCertificate cert = planar_check(as_columns(cfg), MeasurementKind::bearing, cfg.dim(), s, q, budget);
  if (cfg.dim() == 3) {
    const std::string ext = "3D bearing check is an extension of the planar result";
    cert.note = cert.note.empty() ? ext : cert.note + "; " + ext;
  }
  return cert;
}

NspCertificate nsp_check_3d_distance(const Configuration& cfg, int s, double q, const SearchBudget& budget) {
  if (cfg.dim() != 3) throw Error("nsp_check_3d_distance: configuration must be 3D");
  const Eigen::MatrixXd points = as_columns(cfg);
  const int n = cfg.num_agents();
  check_arguments(n, s, q);
  NspCertificate cert;
  cert.kind = MeasurementKind::distance;
  cert.dim = 3;
  cert.s = s;
  cert.q = q;
  cert.budget = budget;
  if (trivial_level(cert, n)) return cert;

  struct PlaneResult {
    Eigen::Vector3d normal;
    Eigen::Vector3d c;
    double margin;
    double scale;
  };
  std::vector<PlaneResult> planes;
  for (const Eigen::Vector3d& normal : hemisphere_directions(budget.plane_count)) {
    const Eigen::Matrix<double, 3, 2> basis = plane_basis(normal);
    const Eigen::MatrixXd projected = basis.transpose() * points;
    const MarginSearch m = minimize_margin(projected, s, q, budget.grid_points, budget);
    planes.push_back({normal, basis * m.best.x, m.best.value, m.scale});
    if (m.best.value <= 0.0) break;
  }
  std::stable_sort(planes.begin(), planes.end(),
                   [](const PlaneResult& a, const PlaneResult& b) { return a.margin < b.margin; });

  PlaneResult best = planes.front();
  if (best.margin > 0.0) {
    const Box box = search_box(points, budget.expansion);
    const double cell = (box.hi - box.lo).maxCoeff() / std::max(1, budget.grid_points - 1);
    const Objective f = [&](const Eigen::VectorXd& z) {
      return axis_margin(points, direction_from_angles(z[0], z[1]), z.tail<3>(), s, q, nullptr);
    };
    Eigen::VectorXd step(5);
    step << 0.05, 0.05, cell, cell, cell;
    const int count = std::min<int>(budget.plane_refine, static_cast<int>(planes.size()));
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd z(5);
      z.head<2>() = angles_from_direction(planes[k].normal);
      z.tail<3>() = planes[k].c;
      const SearchPoint refined = nelder_mead(f, z, step, budget.refine_iterations);
      if (refined.value < best.margin) {
        best.normal = direction_from_angles(refined.x[0], refined.x[1]);
        best.c = refined.x.tail<3>();
        best.margin = refined.value;
      }
    }
  }

  const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - best.normal * best.normal.transpose();
  // Report the witness as the point of the rotation axis closest to the origin.
  best.c = proj * best.c;
  best.scale = 0.0;
  for (int k = 0; k < n; ++k) best.scale += powq((proj * (points.col(k) - best.c)).norm(), q);
  cert.witness_c = best.c;
  cert.witness_normal = best.normal;
  cert.margin = axis_margin(points, best.normal, best.c, s, q, &cert.witness_subset);
  cert.verdict = verdict_for(cert.margin, best.scale);
  return cert;
}

NspCertificate nsp_check(const Configuration& cfg, MeasurementKind kind, int s, double q,
                         const SearchBudget& budget) {
  if (kind == MeasurementKind::bearing) return nsp_check_bearing(cfg, s, q, budget);
  return cfg.dim() == 2 ? nsp_check_2d(cfg, s, q, budget) : nsp_check_3d_distance(cfg, s, q, budget);
}

namespace {

void require_rigid(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind, RigidityReport* out) {
  const RigidityReport report = rigidity_report(rigidity_matrix(kind, cfg, graph));
  if (!report.is_infinitesimally_rigid) {
    throw Error("configuration is not infinitesimally rigid (rank " + std::to_string(report.rank) + ", maximal " +
                std::to_string(report.maximal_rank) + ")");
  }
  if (out) *out = report;
}

}  // namespace

std::vector<NspCertificate> certify_levels(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind,
                                           double q, const SearchBudget& budget) {
  require_rigid(cfg, graph, kind, nullptr);
  std::vector<NspCertificate> out;
  for (int s = 1; s <= cfg.num_agents(); ++s) {
    out.push_back(nsp_check(cfg, kind, s, q, budget));
    if (out.back().verdict != NspVerdict::holds) break;
  }
  return out;
}

int max_certified_errors(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind, double q,
                         const SearchBudget& budget) {
  const auto levels = certify_levels(cfg, graph, kind, q, budget);
  int best = 0;
  for (const auto& c : levels)
    if (c.verdict == NspVerdict::holds) best = c.s;
  return best;
}

namespace {

double ratio_of(std::vector<double>& r, int s) {
  const auto [top, total] = top_and_total(r, s);
  const double rest = total - top;
  if (rest <= 0.0) return top > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return top / rest;
}

// Ratio for kernel vectors whose block norms are |p_i - c| (planar rotations
// about c, or scalings about c).
double centered_ratio(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, int s, double q) {
  std::vector<double> r(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index k = 0; k < points.cols(); ++k) r[k] = powq((points.col(k) - c).norm(), q);
  return ratio_of(r, s);
}

// 3D rotation about the axis (n, c) plus a translation a along the axis.
double screw_ratio(const Eigen::MatrixXd& points, const Eigen::Vector3d& n, const Eigen::Vector3d& c, double a, int s,
                   double q) {
  const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - n * n.transpose();
  std::vector<double> r(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index k = 0; k < points.cols(); ++k)
    r[k] = powq(std::sqrt(a * a + (proj * (points.col(k) - c)).squaredNorm()), q);
  return ratio_of(r, s);
}

}  // namespace

NspRatio worst_nsp_ratio(const Configuration& cfg, MeasurementKind kind, int s, double q, const SearchBudget& budget) {
  const int n = cfg.num_agents();
  const int d = cfg.dim();
  if (s < 0 || s >= n) throw Error("worst_nsp_ratio: s must lie in [0, |V|)");
  if (!(q > 0.0 && q <= 1.0)) throw Error("worst_nsp_ratio: q must lie in (0, 1]");
  NspRatio out;
  if (s == 0) return out;
  out.value = static_cast<double>(s) / static_cast<double>(n - s);

  const Eigen::MatrixXd points = as_columns(cfg);
  BlockVector v(d, n);

  if (kind == MeasurementKind::bearing || d == 2) {
    const Box box = search_box(points, budget.expansion);
    const Objective f = [&](const Eigen::VectorXd& c) { return -centered_ratio(points, c, s, q); };
    const GridRefineOptions opts{d == 3 ? budget.grid_points_3d : budget.grid_points, budget.refine_starts,
                                 budget.refine_iterations};
    const SearchPoint best = grid_refine_minimize(f, box.lo, box.hi, column_seeds(points), opts);
    if (-best.value > out.value) {
      out.value = -best.value;
      Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(d, d);
      if (kind == MeasurementKind::distance) rot << 0, 1, -1, 0;
      for (int i = 0; i < n; ++i) v.block(i) = rot * (points.col(i) - best.x);
      out.maximizer = v;
    }
    return out;
  }

  struct Candidate {
    Eigen::Vector3d normal;
    Eigen::Vector3d c;
    double value;
  };
  std::vector<Candidate> planes;
  for (const Eigen::Vector3d& normal : hemisphere_directions(budget.plane_count)) {
    const Eigen::Matrix<double, 3, 2> basis = plane_basis(normal);
    const Eigen::MatrixXd projected = basis.transpose() * points;
    const Box box = search_box(projected, budget.expansion);
    const Objective f = [&](const Eigen::VectorXd& c) { return -centered_ratio(projected, c, s, q); };
    const GridRefineOptions opts{budget.grid_points, budget.refine_starts, budget.refine_iterations};
    const SearchPoint best = grid_refine_minimize(f, box.lo, box.hi, column_seeds(projected), opts);
    planes.push_back({normal, basis * best.x, -best.value});
  }
  std::stable_sort(planes.begin(), planes.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  const Box box = search_box(points, budget.expansion);
  const double cell = (box.hi - box.lo).maxCoeff() / std::max(1, budget.grid_points - 1);
  const Objective f = [&](const Eigen::VectorXd& z) {
    return -screw_ratio(points, direction_from_angles(z[0], z[1]), z.segment<3>(2), z[5], s, q);
  };
  Eigen::VectorXd step(6);
  step << 0.05, 0.05, cell, cell, cell, cell;
  Eigen::VectorXd best_z;
  double best_value = -std::numeric_limits<double>::infinity();
  const int count = std::min<int>(budget.plane_refine, static_cast<int>(planes.size()));
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd z(6);
    z.head<2>() = angles_from_direction(planes[k].normal);
    z.segment<3>(2) = planes[k].c;
    z[5] = 0.0;
    const SearchPoint refined = nelder_mead(f, z, step, 5 * budget.refine_iterations);
    if (-refined.value > best_value) {
      best_value = -refined.value;
      best_z = refined.x;
    }
  }
  if (best_value > out.value) {
    out.value = best_value;
    const Eigen::Vector3d nrm = direction_from_angles(best_z[0], best_z[1]);
    const Eigen::Vector3d c = best_z.segment<3>(2);
    for (int i = 0; i < n; ++i) v.block(i) = nrm.cross(Eigen::Vector3d(points.col(i)) - c) + best_z[5] * nrm;
    out.maximizer = v;
  }
  return out;
}

double gamma_constant(double tau_bar, double tau, int num_agents, double lambda) {
  if (!(lambda > 0.0)) return std::numeric_limits<double>::infinity();
  return (1.0 + tau_bar + tau) * std::sqrt(static_cast<double>(num_agents) / lambda);
}

double c_q_tau(double q, double tau) {
  const double tq = std::pow(tau, q);
  return std::pow(2.0, 2.0 / q - 1.0) * std::pow((1.0 + tq) / (1.0 - tq), 1.0 / q);
}

double c_q_tau_gamma(double q, double tau, double gamma) {
  const double tq = std::pow(tau, q);
  return std::pow(2.0, 2.0 / q) * std::pow(1.0 / (1.0 - tq), 1.0 / q) * gamma;
}

nlohmann::json to_json(const RobustConstants& rc) {
  return {{"s", rc.s},         {"q", rc.q},         {"num_agents", rc.num_agents},
          {"tau_bar", rc.tau_bar}, {"tau", rc.tau}, {"lambda", rc.lambda},
          {"gamma", rc.gamma}, {"C_q_tau", rc.c_q_tau}, {"C_q_tau_gamma", rc.c_q_tau_gamma}};
}

RobustConstants robust_constants(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind, int s,
                                 double tau_choice, double q, const SearchBudget& budget) {
  if (!(tau_choice >= 0.0 && tau_choice < 1.0)) throw Error("robust_constants: tau must lie in [0, 1)");
  RigidityReport report;
  require_rigid(cfg, graph, kind, &report);
  const NspRatio ratio = worst_nsp_ratio(cfg, kind, s, q, budget);
  if (ratio.value >= 1.0) {
    throw Error("robust_constants: block NSP of order " + std::to_string(s) + " is violated (tau_bar = " +
                std::to_string(ratio.value) + ")");
  }
  RobustConstants rc;
  rc.s = s;
  rc.q = q;
  rc.num_agents = cfg.num_agents();
  rc.tau_bar = ratio.value;
  rc.tau = std::max(ratio.value, tau_choice);
  rc.lambda = report.worst_case_index;
  rc.gamma = gamma_constant(rc.tau_bar, rc.tau, rc.num_agents, rc.lambda);
  rc.c_q_tau = c_q_tau(q, rc.tau);
  rc.c_q_tau_gamma = c_q_tau_gamma(q, rc.tau, rc.gamma);
  return rc;
}

double sigma_qs(const BlockVector& x, int s, double q) {
  const int n = x.num_blocks();
  if (s < 0 || s > n) throw Error("sigma_qs: s must lie in [0, |V|]");
  if (!(q > 0.0 && q <= 1.0)) throw Error("sigma_qs: q must lie in (0, 1]");
  const Eigen::VectorXd norms = x.block_norms();
  std::vector<double> r(norms.data(), norms.data() + norms.size());
  IndexSet keep = top_indices(r, s);
  BlockVector tail = x;
  for (int i : keep) tail.block(i).setZero();
  return block_norm(tail, q);
}

}  // namespace sparseloc
