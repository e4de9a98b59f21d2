// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sparseloc/core_model.hpp"
#include "sparseloc/measurement.hpp"
#include "sparseloc/rigidity.hpp"

namespace sparseloc {

/// Search effort behind an NSP certificate. `holds` means no violation was
/// found within this budget; it is not a proof.
struct SearchBudget {
  int grid_points = 101;
  /// Points per axis for searches over c in R^3 (3D bearing).
  int grid_points_3d = 41;
  /// The box is the bounding box grown by this many diameters on every side.
  double expansion = 1.0;
  int refine_iterations = 200;
  int refine_starts = 5;
  int plane_count = 200;
  int plane_refine = 5;
};

nlohmann::json to_json(const SearchBudget& budget);

enum class NspVerdict { holds, violated, undecided };

std::string_view to_string(NspVerdict verdict);

struct NspCertificate {
  MeasurementKind kind = MeasurementKind::distance;
  int dim = 2;
  int s = 0;
  double q = 1.0;
  NspVerdict verdict = NspVerdict::undecided;
  /// Minimizer of the margin found by the search (a violation point when violated).
  Eigen::VectorXd witness_c;
  /// Plane normal for 3D distance checks, empty otherwise.
  Eigen::VectorXd witness_normal;
  /// The s agents furthest from witness_c (in the witness plane for 3D distance).
  IndexSet witness_subset;
  /// min over searched c of sum_{S^c} |p_i - c|^q - sum_S |p_i - c|^q.
  double margin = 0.0;
  SearchBudget budget;
  std::string note;
};

nlohmann::json to_json(const NspCertificate& cert);

/// Margin at a single point: rest sum minus the sum over the s furthest
/// points. `points` holds one point per column.
double nsp_margin(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, int s, double q,
                  IndexSet* furthest = nullptr);

/// Largest number of positions within `tol` of a common line. tol < 0 selects
/// 1e-6 * diameter.
int max_colinear_count(const Configuration& cfg, double tol = -1.0);

/// Largest integer strictly below (|V| - s_tilde) / 2. s_tilde is forced to 1
/// for 2D distance and for bearing.
int l0_recovery_limit(int num_agents, MeasurementKind kind, int dim, int s_tilde = 1);

NspCertificate nsp_check_2d(const Configuration& cfg, int s, double q, const SearchBudget& budget = {});
NspCertificate nsp_check_3d_distance(const Configuration& cfg, int s, double q, const SearchBudget& budget = {});
NspCertificate nsp_check_bearing(const Configuration& cfg, int s, double q, const SearchBudget& budget = {});
NspCertificate nsp_check(const Configuration& cfg, MeasurementKind kind, int s, double q,
                         const SearchBudget& budget = {});

/// Certificates for s = 1, 2, ... up to and including the first that does not hold.
std::vector<NspCertificate> certify_levels(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind,
                                           double q, const SearchBudget& budget = {});

/// Largest s whose check holds. Throws on a non-rigid configuration.
int max_certified_errors(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind, double q,
                         const SearchBudget& budget = {});

struct NspRatio {
  /// sup over non-zero kernel vectors of (sum of s largest |v_i|^q) / (rest).
  double value = 0.0;
  /// Kernel vector attaining `value` (unnormalized), empty for the translation limit.
  BlockVector maximizer;
};

/// Worst l_q block-NSP ratio over the analytic kernel, by grid and refinement
/// over the kernel parametrization. Includes the translation limit s/(|V|-s).
NspRatio worst_nsp_ratio(const Configuration& cfg, MeasurementKind kind, int s, double q = 1.0,
                         const SearchBudget& budget = {});

struct RobustConstants {
  int s = 0;
  double q = 1.0;
  int num_agents = 0;
  double tau_bar = 0.0;
  double tau = 0.0;
  /// Smallest non-zero eigenvalue of R^T R.
  double lambda = 0.0;
  double gamma = 0.0;
  double c_q_tau = 0.0;
  double c_q_tau_gamma = 0.0;
};

nlohmann::json to_json(const RobustConstants& rc);

/// (1 + tau_bar + tau) * sqrt(num_agents / lambda).
double gamma_constant(double tau_bar, double tau, int num_agents, double lambda);
/// 2^(2/q-1) ((1 + tau^q) / (1 - tau^q))^(1/q).
double c_q_tau(double q, double tau);
/// 2^(2/q) (1 / (1 - tau^q))^(1/q) gamma.
double c_q_tau_gamma(double q, double tau, double gamma);

/// tau = max(tau_bar, tau_choice). Throws if the configuration is not rigid,
/// tau_choice is outside [0, 1) or tau_bar >= 1 (NSP of order s violated).
RobustConstants robust_constants(const Configuration& cfg, const SensorGraph& graph, MeasurementKind kind, int s,
                                 double tau_choice, double q = 1.0, const SearchBudget& budget = {});

/// |x|_{2,q} with the s largest blocks removed (ties keep the lower index).
double sigma_qs(const BlockVector& x, int s, double q);

}  // namespace sparseloc
