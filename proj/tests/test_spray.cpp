#include "finsler/spray.hpp"

#include <cmath>

#include "doctest.h"
#include "finsler/sampling.hpp"
#include "oracles.hpp"
#include "nested_oracle.hpp"
#include "test_metrics_common.hpp"

using namespace finsler;
using namespace finsler::testing;

namespace {

// finite-difference spray oracle: quadratic families only, differentiates
// g_jl(x) numerically and assembles the defining formula with plain algebra
Vec fd_spray(const MetricSpec& m, const FiberPoint& p) {
  const int n = m.dim();
  auto g_entry = [&](const Vec& x, int i, int j) {
    return fundamental_tensor(m, FiberPoint(x, p.y)).g(i, j);
  };
  const Mat g = fundamental_tensor(m, p).g;
  const Mat g_inv = g.inverse();
  std::vector<Mat> dg(n, Mat(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dg[k](i, j) = fd_partial([&](const Vec& x) { return g_entry(x, i, j); }, p.x, k);
  Vec G = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          acc += g_inv(i, l) * (dg[k](j, l) + dg[j](l, k) - dg[l](j, k)) * p.y[j] * p.y[k];
    G[i] = 0.25 * acc;
  }
  return G;
}

Mat constant_curvature_R(const MetricSpec& m, const FiberPoint& p, double c) {
  const auto ft = fundamental_tensor(m, p);
  const double F2 = p.y.dot(ft.g * p.y);
  const Vec y_flat = ft.g * p.y;
  return c * (F2 * Mat::Identity(p.dim(), p.dim()) - p.y * y_flat.transpose());
}

}  // namespace

TEST_CASE("constant-coefficient metrics have vanishing spray data") {
  for (const auto& m : {euclidean2(), randers_constant(0.4)}) {
    const auto B = curvature_bundle(m, fp(0.3, -1.2, 0.7, 0.5));
    CHECK(B.G.norm() < 1e-14);
    CHECK(B.N.norm() < 1e-14);
    CHECK(B.R.norm() < 1e-12);
    for (const auto& gamma : B.Gamma) CHECK(gamma.norm() < 1e-13);
  }
}

TEST_CASE("spray coefficients match the finite-difference oracle") {
  const MetricSpec m = round_sphere_chart();
  SampleRng rng(11);
  const FiberPoint pts[] = {fp(0, 0, 1, 0), rng.fiber_point(plane2()), rng.fiber_point(plane2())};
  for (const auto& p : pts) {
    const Vec G = spray_coefficients(m, p);
    const Vec G_fd = fd_spray(m, p);
    const double scale = std::max(1.0, G.norm());
    CHECK((G - G_fd).norm() < 1e-5 * scale);
  }
}

TEST_CASE("round-sphere curvature equals the constant-curvature closed form") {
  const MetricSpec m = round_sphere_chart();

  const Mat R0 = riemann_curvature(m, fp(0, 0, 1, 0));
  Mat expected(2, 2);
  expected << 0, 0, 0, 4;
  CHECK((R0 - expected).norm() < 1e-10);

  SampleRng rng(12);
  for (int s = 0; s < 64; ++s) {
    const FiberPoint p = rng.fiber_point(plane2());
    const double F2 = sq(eval_norm(m, p));
    const Mat R = riemann_curvature(m, p);
    CHECK((R - constant_curvature_R(m, p, 1.0)).norm() < 1e-6 * F2);
  }
}

TEST_CASE("homogeneity degrees of G, N, R in y") {
  const MetricSpec metrics[] = {randers_torus(), round_sphere_chart()};
  SampleRng rng(13);
  for (const auto& m : metrics) {
    for (int s = 0; s < 32; ++s) {
      const FiberPoint p = rng.fiber_point(torus2());
      const auto B = curvature_bundle(m, p);
      for (const double lambda : {0.5, 2.0}) {
        const auto Bs = curvature_bundle(m, p.scaled(lambda));
        CHECK((Bs.G - lambda * lambda * B.G).norm() < 1e-8 * std::max(1.0, B.G.norm()));
        CHECK((Bs.N - lambda * B.N).norm() < 1e-8 * std::max(1.0, B.N.norm()));
        CHECK((Bs.R - lambda * lambda * B.R).norm() <
              1e-8 * std::max(1.0, lambda * lambda * B.R.norm()));
      }
    }
  }
}

TEST_CASE("algebraic identities of the curvature bundle") {
  const MetricSpec metrics[] = {randers_torus(), round_sphere_chart()};
  SampleRng rng(14);
  for (const auto& m : metrics) {
    for (int s = 0; s < 64; ++s) {
      const FiberPoint p = rng.fiber_point(torus2());
      const auto B = curvature_bundle(m, p);
      const double F2 = B.F * B.F;

      // R^i_k y^k = 0
      CHECK((B.R * p.y).norm() < 1e-8 * F2);

      // g_il R^l_k symmetric
      const Mat gR = B.g * B.R;
      CHECK((gR - gR.transpose()).norm() < 1e-8 * F2 * std::max(1.0, B.g.norm()));

      // Gamma^i_jk y^j y^k = 2 G^i and Gamma^i_jk y^k = N^i_j
      for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(p.y.dot(B.Gamma[i] * p.y) - 2.0 * B.G[i]) <
              1e-9 * std::max(1.0, std::abs(2.0 * B.G[i])));
        const Vec gy = B.Gamma[i] * p.y;
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(gy[j] - B.N(i, j)) < 1e-9 * std::max(1.0, std::abs(B.N(i, j))));
        CHECK((B.Gamma[i] - B.Gamma[i].transpose()).norm() < 1e-12 * std::max(1.0, B.Gamma[i].norm()));
      }
    }
  }
}

TEST_CASE("Berwald coefficients of a Riemannian member are the Christoffel symbols") {
  const MetricSpec m = round_sphere_chart();
  const Vec x = (Vec(2) << 0.4, -0.2).finished();
  const FiberPoint p(x, (Vec(2) << 0.8, 0.3).finished());
  const auto Gamma = berwald_coefficients(m, p);

  // y-independence
  const auto Gamma2 = berwald_coefficients(m, FiberPoint(x, (Vec(2) << -0.5, 1.1).finished()));
  for (int i = 0; i < 2; ++i) CHECK((Gamma[i] - Gamma2[i]).norm() < 1e-10);

  // finite-difference Christoffel oracle on a_ij(x)
  auto a_entry = [&](const Vec& xx, int i, int j) {
    return fundamental_tensor(m, FiberPoint(xx, p.y)).g(i, j);
  };
  const Mat a = fundamental_tensor(m, p).g;
  const Mat a_inv = a.inverse();
  std::vector<Mat> da(2, Mat(2, 2));
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        da[k](i, j) = fd_partial([&](const Vec& xx) { return a_entry(xx, i, j); }, x, k);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double christoffel = 0.0;
        for (int l = 0; l < 2; ++l)
          christoffel += 0.5 * a_inv(i, l) * (da[k](j, l) + da[j](l, k) - da[l](j, k));
        CHECK(std::abs(Gamma[i](j, k) - christoffel) < 1e-5);
      }
}

TEST_CASE("dynamical derivative of the metric tensor vanishes") {
  const MetricSpec metrics[] = {euclidean2(), randers_torus(), round_sphere_chart()};
  SampleRng rng(15);
  for (const auto& m : metrics) {
    for (int s = 0; s < 16; ++s) {
      const FiberPoint p = rng.fiber_point(torus2());
      const auto B = curvature_bundle(m, p);
      const Mat gdd = metric_compatibility(m, p);
      CHECK(gdd.cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, B.g.norm() * B.F));
    }
  }
}

TEST_CASE("dynamical derivative of scalars") {
  // F itself has vanishing dynamical derivative
  const MetricSpec randers = randers_torus();
  const Expression F_expr =
      Expression::parse("sqrt(y1^2 + y2^2) + 0.3*sin(x1)*y2", 2);
  SampleRng rng(16);
  for (int s = 0; s < 32; ++s) {
    const FiberPoint p = rng.fiber_point(torus2());
    const double F = eval_norm(randers, p);
    CHECK(std::abs(dynamical_derivative_scalar(randers, F_expr, p)) < 1e-9 * F);
  }

  // flat torus: G = 0, so f_{|0} = y^i df/dx^i
  const MetricSpec flat = euclidean2();
  const Expression f = Expression::parse("sin(x1)", 2);
  const FiberPoint p = fp(0.7, 0.1, 1.3, -0.4);
  CHECK(dynamical_derivative_scalar(flat, f, p) ==
        doctest::Approx(1.3 * std::cos(0.7)).epsilon(1e-12));

  // constants are annihilated
  const Expression c = Expression::parse("5", 2);
  CHECK(dynamical_derivative_scalar(flat, c, p) == doctest::Approx(0.0));
}

TEST_CASE("covariant section derivative") {
  const MetricSpec flat = euclidean2();
  const auto constant_field = VectorFieldDef::parse({"0.7", "-0.2"}, 2);
  const auto sin_field = VectorFieldDef::parse({"0", "sin(x1)"}, 2);

  CHECK(covariant_section_derivative(flat, constant_field, fp(1, 2, 3, 4)).norm() < 1e-15);

  const FiberPoint p = fp(0.9, -0.3, 1.1, 0.6);
  const Vec dd = covariant_section_derivative(flat, sin_field, p);
  CHECK(dd[0] == doctest::Approx(0.0));
  CHECK(dd[1] == doctest::Approx(1.1 * std::cos(0.9)).epsilon(1e-12));

  // rotation field on the sphere chart vs the displayed formula with
  // finite-difference field derivatives
  const MetricSpec sphere = round_sphere_chart();
  const auto rotation = VectorFieldDef::parse({"-x2", "x1"}, 2);
  SampleRng rng(17);
  for (int s = 0; s < 8; ++s) {
    const FiberPoint q = rng.fiber_point(plane2());
    const auto cv = connection_values(sphere, q);
    Vec expected(2);
    for (int i = 0; i < 2; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 2; ++j)
        acc += q.y[j] * fd_partial([&](const Vec& x) { return rotation.eval_d(x)[i]; }, q.x, j);
      for (int k = 0; k < 2; ++k) acc += rotation.eval_d(q.x)[k] * cv.N(i, k);
      expected[i] = acc;
    }
    const Vec got = covariant_section_derivative(sphere, rotation, q);
    CHECK((got - expected).norm() < 1e-5 * std::max(1.0, got.norm()));
  }
}

TEST_CASE("second dynamical derivative") {
  const MetricSpec flat = euclidean2();
  const auto sin_field = VectorFieldDef::parse({"0", "sin(x1)"}, 2);
  const auto constant_field = VectorFieldDef::parse({"1", "2"}, 2);

  CHECK(second_dynamical_derivative(flat, constant_field, fp(1, 2, 3, 4)).norm() < 1e-15);

  const FiberPoint p = fp(0.4, 0.0, 0.9, -0.7);
  const Vec ddd = second_dynamical_derivative(flat, sin_field, p);
  CHECK(ddd[0] == doctest::Approx(0.0));
  CHECK(ddd[1] == doctest::Approx(-sq(0.9) * std::sin(0.4)).epsilon(1e-12));

  // 2-homogeneity in y
  const MetricSpec randers = randers_torus();
  SampleRng rng(18);
  for (int s = 0; s < 16; ++s) {
    const FiberPoint q = rng.fiber_point(torus2());
    const Vec base = second_dynamical_derivative(randers, sin_field, q);
    for (const double lambda : {0.5, 2.0}) {
      const Vec scaled = second_dynamical_derivative(randers, sin_field, q.scaled(lambda));
      CHECK((scaled - lambda * lambda * base).norm() < 1e-9 * std::max(1.0, base.norm()));
    }
  }
}

// ---------------------------------------------------------------------------
// Bracket identities of the spray, with derivatives of the computed tensors
// obtained through a second, nested jet evaluation.
// ---------------------------------------------------------------------------


TEST_CASE("bracket identities of the spray hold componentwise") {
  const MetricSpec metrics[] = {randers_torus(), round_sphere_chart()};
  SampleRng rng(19);
  for (const auto& m : metrics) {
    for (int s = 0; s < 64; ++s) {
      const FiberPoint p = rng.fiber_point(torus2());
      const auto dev = bracket_identity_deviation(m, p);
      CHECK(dev.identity_vertical < 1e-7);
      CHECK(dev.identity_horizontal < 1e-7);
      CHECK(dev.identity_curvature < 1e-7);
    }
  }
}

TEST_CASE("connection derivatives cross-checked by finite differences") {
  const MetricSpec m = randers_torus();
  const FiberPoint p = fp(0.8, 1.9, 0.9, 0.5);
  const auto B = bundle_jets(m, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double fd_x = fd_partial(
            [&](const Vec& x) { return connection_values(m, FiberPoint(x, p.y)).N(i, j); }, p.x,
            k);
        CHECK(std::abs(B.dNdx[k](i, j) - fd_x) < 1e-5);
        const double fd_y = fd_partial(
            [&](const Vec& y) { return connection_values(m, FiberPoint(p.x, y)).N(i, j); }, p.y,
            k);
        CHECK(std::abs(B.v.Gamma[i](j, k) - fd_y) < 1e-5);
      }
    }
}
