// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "sparseloc/core_model.hpp"

namespace sparseloc {

namespace {

struct Callback {
  const Objective* f;
  Eigen::VectorXd scratch;
};

double evaluate(const gsl_vector* v, void* params) {
  auto* cb = static_cast<Callback*>(params);
  for (std::size_t k = 0; k < v->size; ++k) cb->scratch[static_cast<Eigen::Index>(k)] = gsl_vector_get(v, k);
  const double value = (*cb->f)(cb->scratch);
  return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

}  // namespace

SearchPoint nelder_mead(const Objective& f, const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                        int max_iterations) {
  const auto n = static_cast<std::size_t>(start.size());
  SearchPoint best{start, f(start)};
  if (n == 0 || max_iterations <= 0) return best;

  Callback cb{&f, Eigen::VectorXd(start.size())};
  gsl_multimin_function fn{&evaluate, n, &cb};

  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t k = 0; k < n; ++k) {
    gsl_vector_set(x, k, start[static_cast<Eigen::Index>(k)]);
    gsl_vector_set(ss, k, step[static_cast<Eigen::Index>(k)]);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);

  const double min_size = 1e-12 * std::max(1.0, step.cwiseAbs().maxCoeff());
  for (int it = 0; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), min_size) == GSL_SUCCESS) break;
  }
  if (s->fval < best.value) {
    best.value = s->fval;
    for (std::size_t k = 0; k < n; ++k) best.x[static_cast<Eigen::Index>(k)] = gsl_vector_get(s->x, k);
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return best;
}

SearchPoint grid_refine_minimize(const Objective& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 const std::vector<Eigen::VectorXd>& seeds, const GridRefineOptions& options) {
  const auto dims = lo.size();
  const int per_axis = std::max(2, options.points_per_axis);
  const Eigen::VectorXd cell = (hi - lo) / static_cast<double>(per_axis - 1);

  std::vector<SearchPoint> candidates;
  long total = 1;
  for (Eigen::Index k = 0; k < dims; ++k) total *= per_axis;
  candidates.reserve(static_cast<std::size_t>(total) + seeds.size());

  Eigen::VectorXd x(dims);
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (Eigen::Index k = 0; k < dims; ++k) {
      x[k] = lo[k] + cell[k] * static_cast<double>(rem % per_axis);
      rem /= per_axis;
    }
    candidates.push_back({x, f(x)});
  }
  for (const auto& seed : seeds) candidates.push_back({seed, f(seed)});

  const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, options.refine_starts)),
                                                   candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(starts, 1)),
                    candidates.end(), [](const SearchPoint& a, const SearchPoint& b) { return a.value < b.value; });

  SearchPoint best = candidates.front();
  for (std::size_t k = 0; k < starts; ++k) {
    const SearchPoint refined = nelder_mead(f, candidates[k].x, cell, options.refine_iterations);
    if (refined.value < best.value) best = refined;
  }
  return best;
}

std::vector<Eigen::Vector3d> hemisphere_directions(int count) {
  if (count < 1) throw Error("hemisphere_directions: count must be positive");
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(count));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(k);
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

Eigen::Vector3d direction_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Eigen::Vector2d angles_from_direction(const Eigen::Vector3d& direction) {
  const Eigen::Vector3d u = direction.normalized();
  return {std::acos(std::clamp(u.z(), -1.0, 1.0)), std::atan2(u.y(), u.x())};
}

}  // namespace sparseloc
