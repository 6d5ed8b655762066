#include "ellembed/optim.hpp"

#include <cmath>

#include "doctest.h"
#include "ellembed/geometry.hpp"
#include "oracles.hpp"

using namespace ellembed;

namespace {

std::vector<EllipticalPoint> one_point(int d, int k, Rng& rng) {
  std::vector<EllipticalPoint> pts;
  pts.push_back(oracle::random_point(d, rng, k));
  return pts;
}

}  // namespace

TEST_CASE("adagrad: zero gradient leaves parameters and accumulators alone") {
  Rng rng(50);
  auto pts = one_point(3, 2, rng);
  AdagradState state(0.1);
  state.init(pts);
  Vector mean = pts[0].mean;
  Matrix factor = pts[0].factor;
  GradientPair zero(3, 2);
  adagrad_step(state, 0, pts[0].mean, pts[0].factor, zero);
  CHECK((pts[0].mean - mean).norm() == 0.0);
  CHECK((pts[0].factor - factor).norm() == 0.0);
  CHECK(state.accum_mean[0].norm() == 0.0);
}

TEST_CASE("adagrad: first step has near-sign magnitude, second shrinks") {
  Rng rng(51);
  auto pts = one_point(2, 2, rng);
  const double lr = 0.05;
  AdagradState state(lr);
  state.init(pts);

  GradientPair g(2, 2);
  g.d_mean = Vector{{3.0, -2.0}};
  g.d_factor = Matrix::Zero(2, 2);

  Vector before = pts[0].mean;
  adagrad_step(state, 0, pts[0].mean, pts[0].factor, g);
  Vector step1 = before - pts[0].mean;
  // |g| >> sqrt(eps): the first update is lr * sign(g).
  CHECK(step1[0] == doctest::Approx(lr).epsilon(1e-6));
  CHECK(step1[1] == doctest::Approx(-lr).epsilon(1e-6));

  Vector mid = pts[0].mean;
  adagrad_step(state, 0, pts[0].mean, pts[0].factor, g);
  Vector step2 = mid - pts[0].mean;
  CHECK(step2[0] == doctest::Approx(lr / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(step2[1] == doctest::Approx(-lr / std::sqrt(2.0)).epsilon(1e-6));

  // Accumulators never decrease.
  CHECK(state.accum_mean[0][0] == doctest::Approx(2.0 * 9.0));
}

TEST_CASE("adagrad rejects shape mismatches and non-finite gradients") {
  Rng rng(52);
  auto pts = one_point(3, 2, rng);
  AdagradState state(0.1);
  state.init(pts);
  GradientPair wrong(3, 3);
  CHECK_THROWS_AS(adagrad_step(state, 0, pts[0].mean, pts[0].factor, wrong),
                  ShapeError);
  GradientPair bad(3, 2);
  bad.d_mean[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adagrad_step(state, 0, pts[0].mean, pts[0].factor, bad),
                  NumericalError);
}

TEST_CASE("sgd basics") {
  Rng rng(53);
  auto pts = one_point(2, 2, rng);
  SgdState state{1.0};

  GradientPair zero(2, 2);
  Vector before = pts[0].mean;
  sgd_step(state, 0, pts[0].mean, pts[0].factor, zero);
  CHECK((pts[0].mean - before).norm() == 0.0);

  GradientPair g(2, 2);
  g.d_mean = pts[0].mean;
  g.d_factor = pts[0].factor;
  sgd_step(state, 0, pts[0].mean, pts[0].factor, g);
  CHECK(pts[0].mean.norm() == 0.0);
  CHECK(pts[0].factor.norm() == 0.0);
}

TEST_CASE("sgd descends the squared Bures metric on factors") {
  Rng rng(54);
  Matrix l(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) l(i, j) = rng.normal();
  }
  const double eps = 0.01;
  // Target with smallest eigenvalue above eps so zero loss is reachable.
  Matrix b = oracle::random_spd(3, rng, 10.0) + Matrix::Identity(3, 3);

  auto loss = [&](const Matrix& lp) {
    Matrix a = lp * lp.transpose();
    a.diagonal().array() += eps;
    return 0.5 * bures_sq(a, b, 20);
  };

  const double initial = loss(l);
  SgdState state{0.1};
  Vector dummy_mean = Vector::Zero(3);
  double prev = initial;
  for (int step = 0; step < 200; ++step) {
    GradientPair g(3, 3);
    g.d_mean = Vector::Zero(3);
    g.d_factor = grad_bures_factor(l, b, eps, 20);
    sgd_step(state, 0, dummy_mean, l, g);
    const double now = loss(l);
    CHECK(now <= prev + 1e-9);  // monotone descent at this step size
    prev = now;
  }
  CHECK(prev <= 0.01 * initial);  // >= 99% reduction
}

TEST_CASE("identical seeds give bitwise-identical trajectories") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    auto pts = one_point(3, 3, rng);
    Matrix b = oracle::random_spd(3, rng, 10.0);
    AdagradState state(0.05);
    state.init(pts);
    for (int step = 0; step < 20; ++step) {
      GradientPair g(3, 3);
      g.d_mean = Vector::Zero(3);
      g.d_factor = grad_bures_factor(pts[0].factor, b, 0.01, 6);
      adagrad_step(state, 0, pts[0].mean, pts[0].factor, g);
    }
    return pts[0].factor;
  };
  Matrix a = run(99);
  Matrix b = run(99);
  CHECK((a - b).norm() == 0.0);
}
