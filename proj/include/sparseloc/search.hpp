// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sparseloc {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct SearchPoint {
  Eigen::VectorXd x;
  double value = 0.0;
};

struct GridRefineOptions {
  int points_per_axis = 101;
  int refine_starts = 5;
  int refine_iterations = 200;
};

/// Nelder-Mead from `start` with initial simplex steps `step`.
SearchPoint nelder_mead(const Objective& f, const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                        int max_iterations);

/// Evaluates f on a uniform grid over [lo, hi] and at the extra seeds, then
/// refines the `refine_starts` lowest points with Nelder-Mead. Returns the
/// lowest value seen. Deterministic; ties keep the earlier candidate.
SearchPoint grid_refine_minimize(const Objective& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 const std::vector<Eigen::VectorXd>& seeds, const GridRefineOptions& options);

/// `count` unit normals on the upper hemisphere (z >= 0) from a Fibonacci spiral.
std::vector<Eigen::Vector3d> hemisphere_directions(int count);

/// Unit vector from polar angle theta and azimuth phi.
Eigen::Vector3d direction_from_angles(double theta, double phi);
Eigen::Vector2d angles_from_direction(const Eigen::Vector3d& direction);

}  // namespace sparseloc
