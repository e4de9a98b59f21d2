// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/measurement.hpp"

#include <algorithm>

namespace sparseloc {

std::string_view to_string(MeasurementKind kind) {
  return kind == MeasurementKind::distance ? "distance" : "bearing";
}

MeasurementKind parse_measurement_kind(std::string_view text) {
  if (text == "distance") return MeasurementKind::distance;
  if (text == "bearing") return MeasurementKind::bearing;
  throw Error("unknown measurement kind '" + std::string(text) + "' (expected distance|bearing)");
}

std::string_view to_string(FaultMode mode) {
  return mode == FaultMode::uncorrelated ? "uncorrelated" : "fully_correlated";
}

FaultMode parse_fault_mode(std::string_view text) {
  if (text == "uncorrelated") return FaultMode::uncorrelated;
  if (text == "fully_correlated" || text == "correlated") return FaultMode::fully_correlated;
  throw Error("unknown fault mode '" + std::string(text) + "' (expected uncorrelated|fully_correlated)");
}

namespace {

void check_edges(const Configuration& cfg, const SensorGraph& graph) {
  for (const auto& e : graph.edges) {
    if (e.i < 0 || e.j < 0 || e.i >= cfg.num_agents() || e.j >= cfg.num_agents()) {
      throw Error("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") out of range");
    }
  }
}

}  // namespace

MeasurementSet distance_measurements(const Configuration& cfg, const SensorGraph& graph) {
  check_edges(cfg, graph);
  MeasurementSet y{MeasurementKind::distance, cfg.dim(), Eigen::VectorXd(graph.num_edges()), 0.0};
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edges[k];
    y.values[k] = 0.5 * (cfg.position(e.i) - cfg.position(e.j)).squaredNorm();
  }
  return y;
}

MeasurementSet bearing_measurements(const Configuration& cfg, const SensorGraph& graph) {
  check_edges(cfg, graph);
  const int d = cfg.dim();
  MeasurementSet y{MeasurementKind::bearing, d, Eigen::VectorXd(d * graph.num_edges()), 0.0};
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edges[k];
    const Eigen::VectorXd diff = cfg.position(e.i) - cfg.position(e.j);
    const double len = diff.norm();
    if (len <= kCoincidenceTolerance) {
      throw Error("degenerate edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + "): coincident endpoints");
    }
    y.values.segment(d * k, d) = diff / len;
  }
  return y;
}

MeasurementSet measure(MeasurementKind kind, const Configuration& cfg, const SensorGraph& graph) {
  return kind == MeasurementKind::distance ? distance_measurements(cfg, graph) : bearing_measurements(cfg, graph);
}

Eigen::VectorXd residual_vector(const MeasurementSet& y, const Configuration& estimates, const SensorGraph& graph) {
  if (y.dim != estimates.dim()) throw Error("residual_vector: dimension mismatch");
  const auto predicted = measure(y.kind, estimates, graph);
  if (predicted.values.size() != y.values.size()) {
    throw Error("residual_vector: measurement length " + std::to_string(y.values.size()) + " does not match " +
                std::to_string(predicted.values.size()) + " for this graph");
  }
  return y.values - predicted.values;
}

Eigen::VectorXd sample_sphere(int dim, double radius, Rng& rng) {
  if (dim < 1) throw Error("sample_sphere: dim must be positive");
  Eigen::VectorXd v(dim);
  if (radius == 0.0) return Eigen::VectorXd::Zero(dim);
  double norm = 0.0;
  do {
    for (int m = 0; m < dim; ++m) v[m] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-300);
  return v * (radius / norm);
}

Eigen::VectorXd sample_sphere(int dim, double radius, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sphere(dim, radius, rng);
}

ErrorState inject_faults(const Configuration& cfg, const IndexSet& faulty, FaultMode mode, Rng& rng,
                         const FaultCube& cube) {
  const int d = cfg.dim();
  const int n = cfg.num_agents();
  IndexSet set = faulty;
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  for (int i : set)
    if (i < 0 || i >= n) throw Error("inject_faults: agent " + std::to_string(i) + " out of range");

  const double lo = cube.centered ? -0.5 * cube.side : 0.0;
  auto draw = [&] {
    Eigen::VectorXd x(d);
    for (int m = 0; m < d; ++m) x[m] = lo + cube.side * rng.uniform();
    return x;
  };

  BlockVector error(d, n);
  const Eigen::VectorXd shared = mode == FaultMode::fully_correlated ? draw() : Eigen::VectorXd();
  for (int i : set) error.block(i) = mode == FaultMode::fully_correlated ? shared : draw();

  return {cfg.positions() - error, error, set};
}

ErrorState inject_faults(const Configuration& cfg, const IndexSet& faulty, FaultMode mode, std::uint64_t seed,
                         const FaultCube& cube) {
  Rng rng(seed);
  return inject_faults(cfg, faulty, mode, rng, cube);
}

void perturb_healthy_estimates(ErrorState& state, const Configuration& truth, double kappa, Rng& rng) {
  if (kappa < 0.0) throw Error("perturb_healthy_estimates: kappa must be non-negative");
  if (kappa == 0.0) return;
  const IndexSet healthy = complement(state.fault_set, truth.num_agents());
  for (int i : healthy) {
    const Eigen::VectorXd offset = sample_sphere(truth.dim(), kappa, rng);
    state.estimates.block(i) = truth.position(i) + offset;
    state.true_error.block(i) = -offset;
  }
}

MeasurementSet add_measurement_noise(MeasurementSet y, double epsilon, Rng& rng) {
  if (epsilon < 0.0) throw Error("add_measurement_noise: epsilon must be non-negative");
  if (epsilon > 0.0) y.values += sample_sphere(static_cast<int>(y.values.size()), epsilon, rng);
  y.noise_radius = epsilon;
  return y;
}

}  // namespace sparseloc
