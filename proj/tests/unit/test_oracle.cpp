#include "doctest.h"
#include "test_support.hpp"

#include "maxent/errors.hpp"
#include "maxent/manifold_sampler.hpp"

#include <cmath>

using namespace maxent;
using doctest::Approx;

TEST_CASE("linear oracle equals the least-squares point") {
  RngStream rng(1);
  for (int m : {1, 2}) {
    const Matrix w = testing::gaussian_matrix(m + 2, m, rng);
    const LayerMap map(w, ActivationKind::linear);
    const Vector z = testing::gaussian_matrix(m, 1, rng).col(0);
    const Vector ref = w * spd_solve(w.transpose() * w, z);
    CHECK((conditional_mean_oracle(map, z) - ref).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("TED oracle on the symmetric segment") {
  Matrix w(2, 1);
  w << 1, 1;
  const LayerMap map(w, ActivationKind::ted);
  const Vector x = conditional_mean_oracle(map, Vector::Ones(1));
  CHECK(x[0] == Approx(0.5).epsilon(1e-12));
  CHECK(x[1] == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("one-dimensional oracles against closed forms") {
  // TED, x1 + x2 = 0.5: uniform on the segment, x1 ~ U(0, 0.5).
  Matrix w(2, 1);
  w << 1, 1;
  Vector z(1);
  z << 0.5;
  Vector x = conditional_mean_oracle(LayerMap(w, ActivationKind::ted), z);
  CHECK(x[0] == Approx(0.25).epsilon(1e-12));

  // EXP with W = (1, 2)', z = 2: x1 has density proportional to exp(-x1 / 2) on (0, 2).
  Matrix w2(2, 1);
  w2 << 1, 2;
  z << 2.0;
  x = conditional_mean_oracle(LayerMap(w2, ActivationKind::exp), z);
  const double mean_x1 = 2.0 - 2.0 * std::exp(-1.0) / (1.0 - std::exp(-1.0));
  CHECK(x[0] == Approx(mean_x1).epsilon(1e-11));
  CHECK(x[1] == Approx((2.0 - mean_x1) / 2.0).epsilon(1e-11));

  // TG, x1 + x2 = 2: the line coordinate is a normal truncated to (-sqrt 2, sqrt 2),
  // which is symmetric.
  z << 2.0;
  x = conditional_mean_oracle(LayerMap(w, ActivationKind::tg), z);
  CHECK(x[0] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("square maps return the unique manifold point") {
  const LayerMap map(Matrix::Identity(2, 2), ActivationKind::tg);
  Vector z(2);
  z << 0.3, 4.0;
  CHECK(conditional_mean_oracle(map, z) == z);
  z << -0.3, 4.0;
  CHECK_THROWS_AS(conditional_mean_oracle(map, z), OracleUnavailable);
}

TEST_CASE("oracle refuses large null spaces and empty slices") {
  const LayerMap big(Matrix::Identity(5, 2), ActivationKind::tg);
  CHECK_THROWS_AS(conditional_mean_oracle(big, Vector::Ones(2)), OracleUnavailable);
  Matrix w(3, 1);
  w << 1, 1, 1;
  Vector z(1);
  z << 3.5;
  CHECK_THROWS_AS(conditional_mean_oracle(LayerMap(w, ActivationKind::ted), z), OracleUnavailable);
  z << -1.0;
  CHECK_THROWS_AS(conditional_mean_oracle(LayerMap(w, ActivationKind::tg), z), OracleUnavailable);
}

TEST_CASE("two-dimensional TED oracle on the simplex slice") {
  // x1 + x2 + x3 = 1 in the unit cube is the standard simplex; the uniform
  // law there has mean (1/3, 1/3, 1/3).
  Matrix w(3, 1);
  w << 1, 1, 1;
  Vector z(1);
  z << 1.0;
  const Vector x = conditional_mean_oracle(LayerMap(w, ActivationKind::ted), z);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("two-dimensional EXP oracle on the simplex") {
  // On the simplex the unit exponential prior is constant, so the mean is again 1/3 each.
  Matrix w(3, 1);
  w << 1, 1, 1;
  Vector z(1);
  z << 1.0;
  const Vector x = conditional_mean_oracle(LayerMap(w, ActivationKind::exp), z);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("oracle agrees with brute-force integration over a box") {
  // TG, N = 3, M = 1 with a generic W: integrate the prior restricted to the
  // plane by a plain tensor Simpson rule in the (x1, x2) chart.
  Matrix w(3, 1);
  w << 0.6, 0.3, 0.9;
  Vector z(1);
  z << 1.2;
  const Vector x = conditional_mean_oracle(LayerMap(w, ActivationKind::tg), z);
  // x3 = (z - 0.6 x1 - 0.3 x2) / 0.9 >= 0, x1, x2 >= 0.
  auto x3 = [&](double a, double b) { return (1.2 - 0.6 * a - 0.3 * b) / 0.9; };
  double mass = 0, m1 = 0, m2 = 0;
  const int n = 2000;
  const double ha = 2.0 / n;
  for (int i = 0; i <= n; ++i) {
    const double a = i * ha;
    const double bmax = (1.2 - 0.6 * a) / 0.3;
    if (bmax <= 0) continue;
    const double hb = bmax / n;
    const double wa = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    for (int j = 0; j <= n; ++j) {
      const double b = j * hb;
      const double wb = (j == 0 || j == n) ? 1 : (j % 2 ? 4 : 2);
      const double c = std::max(x3(a, b), 0.0);
      const double e = wa * wb * hb * std::exp(-0.5 * (a * a + b * b + c * c));
      mass += e;
      m1 += e * a;
      m2 += e * b;
    }
  }
  CHECK(x[0] == Approx(m1 / mass).epsilon(1e-6));
  CHECK(x[1] == Approx(m2 / mass).epsilon(1e-6));
  CHECK((w.transpose() * x - z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oracle result converges with the grid") {
  RngStream rng(3);
  const Matrix w = testing::gaussian_matrix(3, 1, rng).cwiseAbs();
  const Vector z = w.transpose() * Vector::Constant(3, 0.4);
  const LayerMap map(w, ActivationKind::ted);
  const Vector coarse = conditional_mean_oracle(map, z, 501);
  const Vector fine = conditional_mean_oracle(map, z, 2001);
  CHECK((coarse - fine).cwiseAbs().maxCoeff() < 1e-8);
}
