#include "ellembed/batch.hpp"

#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace ellembed;

namespace {

std::vector<EllipticalPoint> sample_points(int n, int d, std::uint64_t seed,
                                           double eps = 0.0) {
  Rng rng(seed);
  std::vector<EllipticalPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(oracle::random_point(d, rng, d, eps));
  return pts;
}

}  // namespace

TEST_CASE("parallel pairwise w2 grid equals the serial reference") {
  auto rows = sample_points(7, 3, 31);
  auto cols = sample_points(5, 3, 32);
  Matrix par = pairwise_w2_sq(rows, cols, 20, 0);
  Matrix ref = reference::pairwise_w2_sq(rows, cols, 20);
  CHECK(par.rows() == 7);
  CHECK(par.cols() == 5);
  CHECK((par - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parallel pairwise polarization equals the serial reference") {
  auto rows = sample_points(6, 4, 33, 0.01);
  Matrix par = pairwise_polarization(rows, rows, 20, 0);
  Matrix ref = reference::pairwise_polarization(rows, rows, 20);
  CHECK((par - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grid output is identical for any thread count") {
  auto rows = sample_points(9, 3, 34);
  Matrix one = pairwise_w2_sq(rows, rows, 20, 1);
  Matrix two = pairwise_w2_sq(rows, rows, 20, 2);
  Matrix four = pairwise_w2_sq(rows, rows, 20, 4);
  CHECK((one - two).norm() == 0.0);
  CHECK((one - four).norm() == 0.0);
}

TEST_CASE("grids handle Diracs in either slot") {
  std::vector<EllipticalPoint> rows = sample_points(3, 2, 35);
  rows.push_back(dirac(Vector::Zero(2)));
  Matrix grid = pairwise_w2_sq(rows, rows, 20, 0);
  for (int i = 0; i < 4; ++i) {
    CHECK(grid(i, i) < 1e-8);
    for (int j = 0; j < 4; ++j) {
      CHECK(grid(i, j) == doctest::Approx(w2_sq(rows[i], rows[j])));
    }
  }
}

TEST_CASE("mixed families are rejected") {
  auto rows = sample_points(2, 2, 36);
  auto cols = sample_points(2, 2, 37);
  cols[1].tau = 0.25;
  CHECK_THROWS_AS(pairwise_w2_sq(rows, cols, 20, 0), FamilyError);
}

TEST_CASE("polarization_batch agrees with scalar ops") {
  Rng rng(38);
  EllipticalPoint alpha = oracle::random_point(3, rng, 3, 0.01);
  EllipticalPoint b1 = oracle::random_point(3, rng, 3, 0.01);
  EllipticalPoint b2 = oracle::random_point(3, rng, 3, 0.01);

  PolarizationBatch batch = polarization_batch(alpha, {&b1, &b2}, 20);
  CHECK(batch.value[0] == doctest::Approx(polarization(alpha, b1)).epsilon(1e-9));
  CHECK(batch.value[1] == doctest::Approx(polarization(alpha, b2)).epsilon(1e-9));
  CHECK((batch.t_ab[0] - transport_map(alpha.scale(), b1.scale()).t).norm() <
        1e-8);
  CHECK((batch.t_ba[1] - transport_map(b2.scale(), alpha.scale()).t).norm() <
        1e-8);
}

TEST_CASE("polarization_batch requires nonsingular scales") {
  Rng rng(39);
  EllipticalPoint alpha = dirac(Vector::Zero(2));
  EllipticalPoint beta = oracle::random_point(2, rng, 2, 0.01);
  CHECK_THROWS_AS(polarization_batch(alpha, {&beta}, 20), SingularityError);
}

TEST_CASE("batched root reuse matches the per-cell Newton-Schulz count") {
  auto rows = sample_points(4, 3, 40, 0.01);
  auto cols = sample_points(5, 3, 41, 0.01);
  reset_newton_schulz_invocations();
  pairwise_w2_sq(rows, cols, 6, 1);
  // n roots for the rows plus one cross root per cell.
  CHECK(newton_schulz_invocations() == 4 + 4 * 5);
}
