#include "finsler/jet.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace finsler;

namespace {

LayoutPtr layout22() { return jet_layout({{2, 2}, {2, 2}}); }

// a smooth composite touching every arithmetic path
template <class S>
S sample_function(const VecX<S>& x, const VecX<S>& y) {
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::sqrt;
  S a = sin(x[0]) * cos(x[1]) + exp(0.3 * y[0]);
  S b = sqrt(1.0 + y[0] * y[0] + y[1] * y[1]);
  S c = pow(b, 1.7) / (2.0 + sin(y[1]));
  return a * c + x[0] * y[1] - 0.25 * ipow(x[1] + y[0], 3);
}

double sample_d(const Vec& v) {
  Vec x = v.head(2), y = v.tail(2);
  return sample_function<double>(x, y);
}

JetD sample_jet(const Vec& x0, const Vec& y0, const LayoutPtr& L) {
  VecX<JetD> x(2), y(2);
  for (int i = 0; i < 2; ++i) {
    x[i] = JetD::variable(L, i, x0[i]);
    y[i] = JetD::variable(L, 2 + i, y0[i]);
  }
  return sample_function<JetD>(x, y);
}

}  // namespace

TEST_CASE("layout enumerates the expected monomial count") {
  auto L = jet_layout({{2, 2}, {2, 4}});
  CHECK(L->size() == 6 * 15);
  CHECK(L->num_vars() == 4);
  CHECK(L->max_total_degree() == 6);

  auto L22 = layout22();
  CHECK(L22->size() == 36);
}

TEST_CASE("polynomial coefficients are exact") {
  auto L = layout22();
  JetD x0 = JetD::variable(L, 0, 2.0);
  JetD x1 = JetD::variable(L, 1, -1.0);
  JetD p = (x0 + x1) * (x0 + x1);  // (x0+x1)^2 around (2,-1): value 1
  CHECK(p.value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.partial(0) == doctest::Approx(2.0));   // 2(x0+x1)
  CHECK(p.partial(1) == doctest::Approx(2.0));
  CHECK(p.taylor_coefficient({2, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(p.taylor_coefficient({1, 1, 0, 0}) == doctest::Approx(2.0));
  CHECK(p.taylor_coefficient({0, 2, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("jet partials agree with finite differences on a smooth composite") {
  const Vec x0 = (Vec(2) << 0.4, -0.7).finished();
  const Vec y0 = (Vec(2) << 1.2, 0.5).finished();
  auto L = layout22();
  const JetD f = sample_jet(x0, y0, L);

  Vec v(4);
  v << x0, y0;
  CHECK(f.value() == doctest::Approx(sample_d(v)).epsilon(1e-14));

  for (int i = 0; i < 4; ++i) {
    const double fd = testing::fd_partial(sample_d, v, i);
    CHECK(std::abs(f.partial(i) - fd) < 1e-5);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const double fd = testing::fd_partial2(sample_d, v, i, j);
      std::vector<int> e(4, 0);
      e[i] += 1;
      e[j] += 1;
      const double factorial = (i == j) ? 2.0 : 1.0;
      const double jet_val = f.taylor_coefficient(e) * factorial;
      CHECK(std::abs(jet_val - fd) < 2e-4);
    }
  }
}

TEST_CASE("formal derivative matches the coefficient shift") {
  const Vec x0 = (Vec(2) << 0.4, -0.7).finished();
  const Vec y0 = (Vec(2) << 1.2, 0.5).finished();
  const JetD f = sample_jet(x0, y0, layout22());

  for (int v = 0; v < 4; ++v) {
    const JetD df = f.derivative(v);
    CHECK(df.value() == doctest::Approx(f.partial(v)).epsilon(1e-14));
    // first partials of the derivative = second coefficients of f
    for (int w = 0; w < 4; ++w) {
      std::vector<int> e(4, 0);
      e[v] += 1;
      e[w] += 1;
      const double factorial = (v == w) ? 2.0 : 1.0;
      CHECK(df.partial(w) ==
            doctest::Approx(f.taylor_coefficient(e) * factorial).epsilon(1e-13));
    }
  }
}

TEST_CASE("division and sqrt are exact inverses") {
  auto L = layout22();
  const JetD f = sample_jet((Vec(2) << 0.1, 0.2).finished(), (Vec(2) << 0.9, -0.3).finished(), L);
  const JetD g = sample_jet((Vec(2) << -0.5, 0.8).finished(), (Vec(2) << 0.4, 1.1).finished(), L);

  const JetD q = f / g;
  const JetD back = q * g - f;
  for (int i = 0; i < L->size(); ++i) CHECK(std::abs(back.coeffs()[i]) < 1e-12);

  const JetD s = sqrt(g * g);
  const JetD diff = (scalar_value(g) > 0 ? s - g : s + g);
  for (int i = 0; i < L->size(); ++i) CHECK(std::abs(diff.coeffs()[i]) < 1e-12);
}

TEST_CASE("truncation keeps low-order coefficients") {
  auto big = jet_layout({{2, 2}, {2, 4}});
  auto small = jet_layout({{2, 1}, {2, 2}});
  VecX<JetD> x(2), y(2);
  for (int i = 0; i < 2; ++i) {
    x[i] = JetD::variable(big, i, 0.3 + i);
    y[i] = JetD::variable(big, 2 + i, 1.0 - 0.4 * i);
  }
  const JetD f = sample_function<JetD>(x, y);
  const JetD t = f.truncated(small);
  CHECK(t.layout() == small);
  CHECK(t.value() == doctest::Approx(f.value()).epsilon(1e-15));
  for (int v = 0; v < 4; ++v)
    CHECK(t.partial(v) == doctest::Approx(f.partial(v)).epsilon(1e-15));
}

TEST_CASE("nested jets expose the same mixed partials") {
  // outer jet in x, inner jet in y: d^2/dx dy of x0*y0^2 + sin(x1*y1)
  auto Lx = jet_layout({{2, 1}});
  auto Ly = jet_layout({{2, 1}});
  const double x0 = 0.7, x1 = -0.4, y0 = 1.3, y1 = 0.6;

  using Inner = Jet<double>;
  using Outer = Jet<Inner>;
  Inner iy0 = Inner::variable(Ly, 0, y0);
  Inner iy1 = Inner::variable(Ly, 1, y1);
  Outer ox0 = Outer::variable(Lx, 0, Inner(y0 * 0 + x0));
  Outer ox1 = Outer::variable(Lx, 1, Inner(x1));
  Outer oy0 = Outer(iy0);
  Outer oy1 = Outer(iy1);

  const Outer f = ox0 * oy0 * oy0 + sin(ox1 * oy1);
  // d/dx0 then d/dy0: y0^2 -> 2 y0
  CHECK(scalar_value(f.partial(0).partial(0)) == doctest::Approx(2.0 * y0).epsilon(1e-13));
  // d/dx1 d/dy1 of sin(x1 y1) = cos(x1 y1) - x1 y1 sin(x1 y1)
  const double expected = std::cos(x1 * y1) - x1 * y1 * std::sin(x1 * y1);
  CHECK(scalar_value(f.partial(1).partial(1)) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("derivative past the cap throws") {
  auto L = jet_layout({{2, 1}, {2, 0}});
  JetD x = JetD::variable(L, 0, 1.0);
  CHECK_THROWS_AS((void)x.derivative(0).derivative(0), Error);
  CHECK_THROWS_AS((void)x.derivative(2), Error);
}

TEST_CASE("constants combine with any layout") {
  auto L = layout22();
  JetD c = 2.5;
  JetD x = JetD::variable(L, 0, 3.0);
  JetD s = c * x + 1.0;
  CHECK(s.value() == doctest::Approx(8.5));
  CHECK(s.partial(0) == doctest::Approx(2.5));
  CHECK(jet_is_zero((c - 2.5) * x));
}
