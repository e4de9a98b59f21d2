// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "sparseloc/rigidity.hpp"
#include "test_support.hpp"

using namespace sparseloc;

TEST_SUITE("rigidity") {

TEST_CASE("triangle distance matrix") {
  const Configuration cfg(2, {{0, 0}, {1, 0}, {0, 1}});
  const SensorGraph g{3, {{0, 1}, {0, 2}, {1, 2}}};
  const auto r = distance_rigidity_matrix(cfg, g);
  REQUIRE(r.matrix.rows() == 3);
  REQUIRE(r.matrix.cols() == 6);
  Eigen::RowVectorXd first(6);
  first << -1, 0, 1, 0, 0, 0;
  CHECK(r.matrix.row(0) == first);
  const auto rep = rigidity_report(r);
  CHECK(rep.rank == 3);
  CHECK(rep.nullity == 3);
  CHECK(rep.maximal_rank == 3);
  CHECK(rep.is_infinitesimally_rigid);
}

TEST_CASE("single edge is not rigid") {
  const Configuration cfg(2, {{0, 0}, {1, 0}});
  const auto rep = rigidity_report(distance_rigidity_matrix(cfg, {2, {{0, 1}}}));
  CHECK(rep.rank == 1);
  CHECK(rep.maximal_rank == 1);
  CHECK(rep.is_infinitesimally_rigid);
  const Configuration line(2, {{0, 0}, {1, 0}, {2, 0}});
  const auto flat = rigidity_report(distance_rigidity_matrix(line, {3, {{0, 1}, {1, 2}, {0, 2}}}));
  CHECK(flat.rank == 2);
  CHECK_FALSE(flat.is_infinitesimally_rigid);
}

TEST_CASE("isolated vertex drops the rank") {
  const Configuration cfg(2, {{0, 0}, {1, 0}, {0, 1}, {4, 4}});
  const auto rep = rigidity_report(distance_rigidity_matrix(cfg, {4, {{0, 1}, {0, 2}, {1, 2}}}));
  CHECK(rep.rank == 3);
  CHECK(rep.maximal_rank == 5);
  CHECK_FALSE(rep.is_infinitesimally_rigid);
}

TEST_CASE("matrices match central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int dim : {2, 3}) {
      for (auto kind : {MeasurementKind::distance, MeasurementKind::bearing}) {
        const auto net = random_geometric_network(7, dim, 7.0, 10.0, seed);
        const auto r = rigidity_matrix(kind, net.config, net.graph).matrix;
        const auto fd = testing::finite_difference_jacobian(kind, net.config, net.graph, 1e-6);
        REQUIRE(r.rows() == fd.rows());
        CHECK((r - fd).norm() <= 1e-6 * std::max(1.0, r.norm()));
      }
    }
  }
}

TEST_CASE("projector identities") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(3);
    for (int m = 0; m < 3; ++m) v[m] = rng.normal();
    const Eigen::MatrixXd p = orthogonal_projector(v);
    CHECK((p * p - p).norm() < 1e-12);
    CHECK((p - p.transpose()).norm() < 1e-15);
    CHECK((p * v).norm() < 1e-12 * v.norm());
    CHECK(p.trace() == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(orthogonal_projector(Eigen::VectorXd::Zero(2)), Error);
}

TEST_CASE("analytic null basis is annihilated and spans the kernel") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int dim : {2, 3}) {
      for (auto kind : {MeasurementKind::distance, MeasurementKind::bearing}) {
        const auto net = testing::rigid_network(8, dim, 7.0, 10.0, seed, kind);
        const auto r = rigidity_matrix(kind, net.config, net.graph);
        const auto basis = analytic_null_basis(net.config, kind);
        const int expected = kind == MeasurementKind::distance ? dim * (dim + 1) / 2 : dim + 1;
        REQUIRE(static_cast<int>(basis.vectors.size()) == expected);
        const Eigen::MatrixXd b = basis.as_matrix();
        CHECK((r.matrix * b).norm() <= 1e-9 * b.norm() * std::max(1.0, r.matrix.norm()));
        CHECK(b.fullPivLu().rank() == expected);
        const auto rep = rigidity_report(r);
        CHECK(rep.is_infinitesimally_rigid);
        CHECK(rep.nullity == expected);
      }
    }
  }
}

TEST_CASE("worst-case index of a triangle matches its characteristic polynomial") {
  const Configuration cfg(2, {{0, 0}, {2, 0}, {0.5, 1.5}});
  const SensorGraph g{3, {{0, 1}, {0, 2}, {1, 2}}};
  for (auto kind : {MeasurementKind::distance, MeasurementKind::bearing}) {
    const auto r = rigidity_matrix(kind, cfg, g);
    const Eigen::MatrixXd gram = r.matrix.transpose() * r.matrix;
    const auto poly = testing::characteristic_polynomial(gram);
    const double upper = gram.trace() + 1.0;
    const double oracle = testing::smallest_root_above(poly, 1e-6, upper);
    CHECK(rigidity_report(r).worst_case_index == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("rank never exceeds the maximal rank") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int dim = 2 + static_cast<int>(seed % 2);
    const auto net = random_geometric_network(9, dim, 6.0, 10.0, seed);
    for (auto kind : {MeasurementKind::distance, MeasurementKind::bearing}) {
      const auto rep = rigidity_report(rigidity_matrix(kind, net.config, net.graph));
      CHECK(rep.rank <= rep.maximal_rank);
      CHECK(rep.rank + rep.nullity == 9 * dim);
      CHECK(rep.eigenvalues.size() == static_cast<std::size_t>(9 * dim));
    }
  }
  CHECK(maximal_rank(MeasurementKind::distance, 3, 13) == 33);
  CHECK(maximal_rank(MeasurementKind::bearing, 2, 5) == 7);
  CHECK(maximal_rank(MeasurementKind::distance, 3, 1) == 0);
}

TEST_CASE("bearing matrix rejects coincident endpoints") {
  const Configuration cfg(2, {{0, 0}, {0, 0}});
  CHECK_THROWS_AS(bearing_rigidity_matrix(cfg, {2, {{0, 1}}}), Error);
}

TEST_CASE("CSV export") {
  const Configuration cfg(2, {{0, 0}, {1, 0}, {0, 1}});
  std::ostringstream out;
  write_rigidity_csv(out, distance_rigidity_matrix(cfg, {3, {{0, 1}, {0, 2}, {1, 2}}}));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# kind=distance,dim=2,agents=3,edges=3");
  std::getline(in, line);
  CHECK(line == "-1,0,1,0,0,0");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

}  // TEST_SUITE
