// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "sparseloc/measurement.hpp"
#include "sparseloc/random.hpp"
#include "test_support.hpp"

using namespace sparseloc;

namespace {

Configuration random_config(int dim, int n, Rng& rng) {
  BlockVector p(dim, n);
  for (Eigen::Index k = 0; k < p.values().size(); ++k) p.values()[k] = rng.uniform(0.0, 10.0);
  return Configuration(p);
}

Eigen::MatrixXd random_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = rng.normal();
  Eigen::MatrixXd q = a.householderQr().householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

Configuration transform(const Configuration& cfg, const Eigen::MatrixXd& rot, const Eigen::VectorXd& shift,
                        double scale) {
  BlockVector p(cfg.dim(), cfg.num_agents());
  for (int i = 0; i < cfg.num_agents(); ++i) p.block(i) = scale * (rot * cfg.position(i)) + shift;
  return Configuration(p);
}

}  // namespace

TEST_SUITE("measurement") {

TEST_CASE("distance and bearing examples") {
  const Configuration cfg(2, {{0, 0}, {3, 4}});
  const SensorGraph g{2, {{0, 1}}};
  CHECK(distance_measurements(cfg, g).values[0] == doctest::Approx(12.5));
  const auto b = bearing_measurements(cfg, g).values;
  CHECK(b[0] == doctest::Approx(-0.6));
  CHECK(b[1] == doctest::Approx(-0.8));

  const Configuration cube(3, {{1, 1, 1}, {0, 0, 0}});
  const auto u = bearing_measurements(cube, g).values;
  for (int m = 0; m < 3; ++m) CHECK(u[m] == doctest::Approx(1.0 / std::sqrt(3.0)));

  const Configuration twin(2, {{1, 1}, {1, 1}});
  CHECK_THROWS_AS(bearing_measurements(twin, g), Error);
  CHECK(distance_measurements(twin, g).values[0] == 0.0);
  CHECK_THROWS_AS(distance_measurements(cfg, SensorGraph{2, {{0, 2}}}), Error);
}

TEST_CASE("kind names parse back") {
  for (auto k : {MeasurementKind::distance, MeasurementKind::bearing}) CHECK(parse_measurement_kind(to_string(k)) == k);
  for (auto m : {FaultMode::uncorrelated, FaultMode::fully_correlated}) CHECK(parse_fault_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_measurement_kind("angle"), Error);
  CHECK_THROWS_AS(parse_fault_mode("partial"), Error);
}

TEST_CASE("measurement invariances") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const int dim = 2 + t % 2;
    const Configuration cfg = random_config(dim, 6, rng);
    const SensorGraph g = testing::complete_graph(6);
    const Eigen::MatrixXd rot = random_rotation(dim, rng);
    Eigen::VectorXd shift(dim);
    for (int m = 0; m < dim; ++m) shift[m] = rng.normal() * 5.0;
    const double scale = rng.uniform(0.5, 3.0);

    const auto d0 = distance_measurements(cfg, g).values;
    const auto d1 = distance_measurements(transform(cfg, rot, shift, 1.0), g).values;
    CHECK((d0 - d1).norm() <= 1e-9 * (1.0 + d0.norm()));

    const auto b0 = bearing_measurements(cfg, g).values;
    const auto b1 = bearing_measurements(transform(cfg, Eigen::MatrixXd::Identity(dim, dim), shift, scale), g).values;
    CHECK((b0 - b1).norm() <= 1e-12 * std::sqrt(static_cast<double>(b0.size())));
    for (int k = 0; k < g.num_edges(); ++k) CHECK(b0.segment(dim * k, dim).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("residual vanishes at the truth") {
  Rng rng(2);
  const Configuration cfg = random_config(3, 5, rng);
  const SensorGraph g = testing::complete_graph(5);
  for (auto kind : {MeasurementKind::distance, MeasurementKind::bearing})
    CHECK(residual_vector(measure(kind, cfg, g), cfg, g).norm() == 0.0);
  CHECK_THROWS_AS(residual_vector(measure(MeasurementKind::distance, cfg, g), cfg, SensorGraph{5, {{0, 1}}}), Error);
}

TEST_CASE("sphere samples") {
  CHECK(sample_sphere(4, 2.5, std::uint64_t{1}).norm() == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(sample_sphere(3, 0.0, std::uint64_t{1}).isZero(0));
  CHECK((sample_sphere(3, 1.0, std::uint64_t{9}) - sample_sphere(3, 1.0, std::uint64_t{9})).isZero(0));
  CHECK_THROWS_AS(sample_sphere(0, 1.0, std::uint64_t{1}), Error);

  Rng rng(77);
  const int samples = 10000;
  for (int dim : {2, 3, 39}) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < samples; ++k) {
      const Eigen::VectorXd v = sample_sphere(dim, 1.0, rng);
      CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
      mean += v;
    }
    mean /= samples;
    CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("fault injection") {
  const Configuration cfg(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  SUBCASE("errors land only on the faulty set, within the cube") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
      const auto st = inject_faults(cfg, {1, 3}, FaultMode::uncorrelated, rng);
      CHECK(st.fault_set == IndexSet{1, 3});
      CHECK(st.true_error.block(0).isZero(0));
      CHECK(st.true_error.block(2).isZero(0));
      for (int i : {1, 3}) {
        CHECK(st.true_error.block(i).minCoeff() >= 0.0);
        CHECK(st.true_error.block(i).maxCoeff() < 1.0);
      }
      CHECK((cfg.positions() - st.estimates - st.true_error).values().norm() < 1e-15);
    }
  }
  SUBCASE("fully correlated errors share one offset") {
    const auto st = inject_faults(cfg, {0, 2, 3}, FaultMode::fully_correlated, std::uint64_t{8});
    CHECK(st.true_error.block(0) == st.true_error.block(2));
    CHECK(st.true_error.block(0) == st.true_error.block(3));
    CHECK(st.true_error.block(1).isZero(0));
  }
  SUBCASE("centered cube") {
    Rng rng(5);
    double lo = 1.0;
    for (int t = 0; t < 200; ++t)
      lo = std::min(lo, inject_faults(cfg, {0}, FaultMode::uncorrelated, rng, {2.0, true}).true_error.values().minCoeff());
    CHECK(lo < 0.0);
    CHECK(lo >= -1.0);
  }
  SUBCASE("empty set and bad indices") {
    const auto st = inject_faults(cfg, {}, FaultMode::uncorrelated, std::uint64_t{1});
    CHECK(st.true_error.values().isZero(0));
    CHECK(st.estimates.values() == cfg.positions().values());
    CHECK_THROWS_AS(inject_faults(cfg, {4}, FaultMode::uncorrelated, std::uint64_t{1}), Error);
  }
  SUBCASE("same seed, same draw") {
    const auto a = inject_faults(cfg, {1, 2}, FaultMode::uncorrelated, std::uint64_t{3});
    const auto b = inject_faults(cfg, {1, 2}, FaultMode::uncorrelated, std::uint64_t{3});
    CHECK(a.true_error.values() == b.true_error.values());
  }
}

TEST_CASE("healthy perturbation and noise") {
  const Configuration cfg(3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  Rng rng(6);
  auto st = inject_faults(cfg, {2}, FaultMode::uncorrelated, rng);
  const Eigen::VectorXd faulty = st.true_error.block(2);
  perturb_healthy_estimates(st, cfg, 0.3, rng);
  for (int i : {0, 1, 3}) {
    CHECK((st.estimates.block(i) - cfg.position(i)).norm() == doctest::Approx(0.3));
    CHECK((cfg.position(i) - st.estimates.block(i) - st.true_error.block(i)).norm() < 1e-15);
  }
  CHECK(st.true_error.block(2) == faulty);
  CHECK_THROWS_AS(perturb_healthy_estimates(st, cfg, -1.0, rng), Error);

  const auto y = measure(MeasurementKind::distance, cfg, testing::complete_graph(4));
  const auto noisy = add_measurement_noise(y, 0.7, rng);
  CHECK((noisy.values - y.values).norm() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(noisy.noise_radius == 0.7);
  CHECK(add_measurement_noise(y, 0.0, rng).values == y.values);
  CHECK_THROWS_AS(add_measurement_noise(y, -0.1, rng), Error);
}

}  // TEST_SUITE
