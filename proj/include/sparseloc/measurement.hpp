// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "sparseloc/core_model.hpp"
#include "sparseloc/random.hpp"

namespace sparseloc {

enum class MeasurementKind { distance, bearing };

std::string_view to_string(MeasurementKind kind);
MeasurementKind parse_measurement_kind(std::string_view text);

/// Scalar rows per edge: 1 for distance, dim for bearing.
inline int rows_per_edge(MeasurementKind kind, int dim) { return kind == MeasurementKind::distance ? 1 : dim; }

/// Stacked measurements y ordered by the graph's edge list.
struct MeasurementSet {
  MeasurementKind kind = MeasurementKind::distance;
  int dim = 0;
  Eigen::VectorXd values;
  double noise_radius = 0.0;
};

/// 0.5 * |p[i] - p[j]|^2 per edge.
MeasurementSet distance_measurements(const Configuration& cfg, const SensorGraph& graph);

/// (p[i] - p[j]) / |p[i] - p[j]| per edge. Throws on a degenerate (zero-length) edge.
MeasurementSet bearing_measurements(const Configuration& cfg, const SensorGraph& graph);

MeasurementSet measure(MeasurementKind kind, const Configuration& cfg, const SensorGraph& graph);

/// z = y - Phi(p_hat).
Eigen::VectorXd residual_vector(const MeasurementSet& y, const Configuration& estimates, const SensorGraph& graph);

/// Uniform point on the sphere of the given radius (norm exactly `radius`).
Eigen::VectorXd sample_sphere(int dim, double radius, Rng& rng);
Eigen::VectorXd sample_sphere(int dim, double radius, std::uint64_t seed);

enum class FaultMode { uncorrelated, fully_correlated };

std::string_view to_string(FaultMode mode);
FaultMode parse_fault_mode(std::string_view text);

/// Fault errors are drawn uniformly from a cube of side `side`, either
/// [0, side]^d (default) or centered at the origin.
struct FaultCube {
  double side = 1.0;
  bool centered = false;
};

/// Draws x on the faulty set and sets p_hat = p - x. Agents outside the set
/// keep perfect estimates.
ErrorState inject_faults(const Configuration& cfg, const IndexSet& faulty, FaultMode mode, Rng& rng,
                         const FaultCube& cube = {});
ErrorState inject_faults(const Configuration& cfg, const IndexSet& faulty, FaultMode mode, std::uint64_t seed,
                         const FaultCube& cube = {});

/// Moves every agent outside the faulty set to a point drawn on the sphere of
/// radius kappa around its true position, updating estimates and true_error.
void perturb_healthy_estimates(ErrorState& state, const Configuration& truth, double kappa, Rng& rng);

/// Adds a noise vector drawn on the sphere of radius epsilon in the full
/// stacked measurement space.
MeasurementSet add_measurement_noise(MeasurementSet y, double epsilon, Rng& rng);

}  // namespace sparseloc
