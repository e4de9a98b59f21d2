// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparseloc/core_model.hpp"
#include "sparseloc/measurement.hpp"
#include "sparseloc/solver.hpp"

namespace sparseloc {

enum class NetworkSourceKind { generated, file, paperlike13 };

struct NetworkSource {
  NetworkSourceKind kind = NetworkSourceKind::paperlike13;
  int n = 13;
  int dim = 3;
  double radius = 0.0;
  double box = 10.0;
  std::uint64_t seed = 1;
  std::filesystem::path path;
};

struct FaultSpec {
  int count = 4;
  FaultMode mode = FaultMode::uncorrelated;
  FaultCube cube;
};

struct SolverConfig {
  double initial_slack = 4.0;
  /// Either a factor in (0, 1] or a reduction ratio > 1 (its reciprocal is used).
  double shrink = 3.0;
  double step_tolerance = 1e-6;
  int max_iterations = 20;
  std::optional<double> support_threshold;
  double inner_tolerance = 1e-8;
  int inner_max_iterations = 100000;
  /// Add the noise radius to the initial slack.
  bool slack_includes_noise = true;
};

struct ScenarioConfig {
  NetworkSource network;
  MeasurementKind kind = MeasurementKind::distance;
  FaultSpec faults;
  double epsilon = 0.0;
  double kappa = 0.0;
  SolverConfig solver;
  /// Noise radius -> shrink ratio. When the scenario's epsilon has an entry it
  /// overrides solver.shrink.
  std::map<double, double> shrink_schedule;
  int trials = 250;
  std::uint64_t base_seed = 1;
  /// Draw a fresh network for every trial instead of one per sweep.
  bool regenerate_network = false;

  void validate(int num_agents) const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& sc);
ScenarioConfig read_scenario(const std::filesystem::path& path);

/// Shrink ratios for noise radii 0..5.
std::map<double, double> default_shrink_schedule();

/// 13 agents uniform in [0, 10]^3 with the radius placed between the 36th and
/// 37th smallest pairwise distances, redrawn until the distance rigidity
/// matrix has rank 33.
NetworkInstance paperlike13(std::uint64_t seed);

/// Resolves the source. Generated networks are redrawn (seed mixed with the
/// attempt number) until rigid for `kind`.
NetworkInstance build_network(const NetworkSource& source, MeasurementKind kind);

ScpParams scp_params_for(const ScenarioConfig& sc);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  IndexSet fault_set;
  IndexSet identified;
  /// NaN when undefined.
  double relative_error = 0.0;
  int iterations = 0;
  std::string status;
  std::string inner_status;
  double wall_seconds = 0.0;
  std::string message;

  bool identified_correctly() const { return identified == fault_set; }
};

/// Relative error |x - x*| / |x|; 0 when x = 0 and |x*| <= threshold, NaN otherwise.
double relative_error(const BlockVector& truth, const BlockVector& estimate, double support_threshold);

struct TrialSetup {
  std::uint64_t seed = 0;
  ErrorState state;
  MeasurementSet measurements;
};

/// Faults, imperfect estimates and noisy measurements for one trial.
TrialSetup prepare_trial(const ScenarioConfig& sc, const NetworkInstance& net, int trial_index);

/// Trial seed = mix_seed(base_seed, trial_index). Sub-streams for fault draws,
/// estimate imperfection and measurement noise use mix_seed(trial seed, 1..3).
TrialRecord run_trial(const ScenarioConfig& sc, const NetworkInstance& net, int trial_index);
TrialRecord run_trial(const ScenarioConfig& sc, int trial_index);

enum class SweepAxis { fault_count, noise_grid, iterations, correlation };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepSpec {
  SweepAxis axis = SweepAxis::fault_count;
  std::vector<int> fault_counts{1, 2, 3, 4, 5, 6};
  /// Empty means the scenario's mode only (fault_count axis).
  std::vector<FaultMode> modes;
  std::vector<double> epsilons{0, 1, 2, 3, 4, 5};
  std::vector<double> kappas{0.0, 0.3, 0.6, 0.9};
  std::vector<int> iterations{1, 2, 3, 4, 5, 6, 7, 8};
};

SweepSpec sweep_from_json(const nlohmann::json& doc, SweepAxis axis);

struct SweepPoint {
  int index = 0;
  ScenarioConfig scenario;
};

std::vector<SweepPoint> sweep_points(const ScenarioConfig& base, const SweepSpec& spec);

struct PointSummary {
  int point = 0;
  int trials = 0;
  int defined_trials = 0;
  double identification_rate = 0.0;
  double mean_relative_error = 0.0;
  double std_relative_error = 0.0;
  double median_relative_error = 0.0;
};

/// Mean and population standard deviation over trials with a defined error.
PointSummary summarize(int point, const std::vector<TrialRecord>& records);

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::vector<TrialRecord>> records;
  std::vector<PointSummary> summaries;
};

/// Runs every point of the sweep on `jobs` threads. Records are ordered by
/// trial index whatever the completion order.
SweepResult monte_carlo_sweep(const ScenarioConfig& sc, const SweepSpec& spec, int jobs = 1);

/// Runs trials [0, sc.trials) on a fixed network.
std::vector<TrialRecord> run_trials(const ScenarioConfig& sc, const NetworkInstance& net, int jobs = 1);

inline constexpr const char* kTrialsCsvVersion = "# sparseloc trials v1";
inline constexpr const char* kAggregateCsvVersion = "# sparseloc aggregate v1";

void write_trials_csv(std::ostream& out, const SweepResult& result);
void write_aggregate_csv(std::ostream& out, const SweepResult& result);
/// Wall-clock timings, kept apart so the other two files stay reproducible.
void write_timing_csv(std::ostream& out, const SweepResult& result);

/// Writes trials.csv, aggregate.csv and timing.csv into `dir`.
void write_sweep(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace sparseloc
