#include "finsler/metric.hpp"

#include <cmath>

#include "doctest.h"
#include "finsler/sampling.hpp"
#include "oracles.hpp"
#include "test_metrics_common.hpp"

using namespace finsler;
using namespace finsler::testing;

TEST_CASE("norm values on closed-form cases") {
  CHECK(eval_norm(euclidean2(), fp(0, 0, 3, 4)) == doctest::Approx(5.0));
  CHECK(eval_norm(randers_constant(0.5), fp(0, 0, 1, 0)) == doctest::Approx(1.5));
  // stereographic round-sphere chart at the origin: conformal factor 2
  CHECK(eval_norm(round_sphere_chart(), fp(0, 0, 1, 0)) == doctest::Approx(2.0));
}

TEST_CASE("zero tangent vectors are rejected at the type boundary") {
  CHECK_THROWS_AS(fp(0, 0, 0, 0), ZeroVector);
}

TEST_CASE("fundamental tensor on closed-form cases") {
  auto id = fundamental_tensor(euclidean2(), fp(0.3, -0.7, 1.1, 0.4));
  CHECK((id.g - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK((id.g_inv - Mat::Identity(2, 2)).norm() < 1e-14);

  auto sphere = fundamental_tensor(round_sphere_chart(), fp(0, 0, 1, 0));
  CHECK((sphere.g - 4.0 * Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("fundamental tensor matches finite differences of F^2/2") {
  const MetricSpec m = randers_constant(0.5);
  const FiberPoint p = fp(0, 0, 0, 1);
  const auto ft = fundamental_tensor(m, p);
  auto half_energy = [&](const Vec& y) { return 0.5 * sq(m.norm<double>(p.x, y)); };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double fd = fd_partial2(half_energy, p.y, i, j, 1e-5 * p.y.norm());
      CHECK(std::abs(ft.g(i, j) - fd) < 1e-5);
    }
}

TEST_CASE("euler relation and homogeneity of g on all four families") {
  const MetricSpec metrics[] = {euclidean2(), round_sphere_chart(), randers_torus(),
                                quartic_metric()};
  SampleRng rng(20240811);
  for (const auto& m : metrics) {
    for (int s = 0; s < 64; ++s) {
      const FiberPoint p = rng.fiber_point(torus2());
      const double f = eval_norm(m, p);
      const auto ft = fundamental_tensor(m, p);
      CHECK(std::abs(p.y.dot(ft.g * p.y) - f * f) < 1e-9 * f * f);
      for (const double lambda : {0.5, 2.0}) {
        const auto ft2 = fundamental_tensor(m, p.scaled(lambda));
        CHECK((ft2.g - ft.g).norm() < 1e-9 * ft.g.norm());
        const double f2 = eval_norm(m, p.scaled(lambda));
        CHECK(std::abs(f2 - lambda * f) < 1e-9 * lambda * f);
      }
    }
  }
}

TEST_CASE("indefinite quadratic data fails the factorization") {
  Mat A(2, 2);
  A << 1.0, 0.0, 0.0, -1.0;
  const MetricSpec m = MetricSpec::euclidean(A);
  CHECK_THROWS_AS(fundamental_tensor(m, fp(0, 0, 1, 0.2)), NotPositiveDefinite);
}

TEST_CASE("validate_metric passes well-formed families") {
  auto rep = validate_metric(euclidean2(), torus2(), 128, 7);
  CHECK(rep.passed());
  CHECK(rep.worst_homogeneity < 1e-12);
  CHECK(rep.positivity_failures == 0);

  auto quartic = validate_metric(quartic_metric(), torus2(), 128, 7);
  CHECK(quartic.passed());
  CHECK(quartic.min_g_eigenvalue > 0.0);

  auto sphere = validate_metric(round_sphere_chart(), plane2(), 128, 7);
  CHECK(sphere.passed());
}

TEST_CASE("validate_metric reports positivity failure for |b| > 1") {
  const MetricSpec bad = randers_constant(1.1);
  auto rep = validate_metric(bad, torus2(), 256, 99);
  CHECK(rep.positivity_failures > 0);
  CHECK_FALSE(rep.passed());
}
