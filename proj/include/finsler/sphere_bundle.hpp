#pragma once

// Hilbert form, Reeb field, and contact volume form on the unit sphere
// bundle SM, with tensor-product quadrature over torus charts.
//
// The SM chart is (x, theta) with y(theta) = u(theta) / F(x, u(theta)), the
// radial scaling of the Euclidean sphere direction onto the indicatrix.  All
// pullback derivatives come from one jet evaluation per point in the
// variables (x, theta, eta), where eta is a formal fiber displacement whose
// first-order coefficients are the F_{y^i} pullbacks.  Pointwise form
// evaluations work in any dimension; the wedge evaluator and quadrature ship
// for n = 2 (dim SM = 3).

#include <array>
#include <functional>

#include "finsler/affine.hpp"
#include "finsler/parallel.hpp"
#include "finsler/spray.hpp"

namespace finsler {

/// Standard spherical direction u(theta) on S^{n-1}; n = theta.size() + 1.
template <class S>
VecX<S> sphere_direction(const VecX<S>& theta) {
  using std::cos;
  using std::sin;
  const int n = static_cast<int>(theta.size()) + 1;
  VecX<S> u(n);
  S running(1.0);
  for (int a = 0; a < n - 1; ++a) {
    u[a] = running * cos(theta[a]);
    running = running * sin(theta[a]);
  }
  u[n - 1] = running;
  return u;
}

/// A point of the unit sphere bundle in the (x, theta) chart.
struct SMChartPoint {
  Vec x;
  Vec theta;  // n-1 angles
  Vec y;      // F(x, y) = 1
};

inline SMChartPoint sm_point(const MetricSpec& m, const Vec& x, const Vec& theta) {
  if (static_cast<int>(theta.size()) != m.dim() - 1)
    throw Error("sm_point: expected n-1 angular coordinates");
  VecX<double> u = sphere_direction<double>(theta);
  const double f = m.norm<double>(x, u);
  if (!(f > 0.0)) throw NonPositiveNorm("sm_point: F <= 0 on the chosen ray");
  SMChartPoint q{x, theta, Vec(u / f)};
  return q;
}

/// Hilbert form, its exterior derivative, and the Reeb field at one chart
/// point.  Chart coordinates are ordered (x^1..x^n, theta^1..theta^{n-1}).
struct HilbertFormData {
  Vec omega;            // omega_i = F_{y^i}; also the dx-components of the pullback
  Vec omega_metric;     // g_ij y^j / F, the displayed alternative expression
  Mat curl;             // K(c,d) = d_c omega~_d - d_d omega~_c on the chart
  Vec xi;               // Reeb field components in the chart basis
  double omega_xi;      // omega(xi); equals 1
  double max_domega_xi; // max_e |d omega(xi, e)|; equals 0
};

inline HilbertFormData hilbert_form(const MetricSpec& m, const SMChartPoint& q) {
  const int n = m.dim();
  const int chart_dim = 2 * n - 1;
  // variables: x (cap 1) | theta (cap 1) | eta (cap 1)
  auto L = jet_layout({{n, 1}, {n - 1, 1}, {n, 1}});
  VecX<JetD> xh(n), th(n - 1);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(L, i, q.x[i]);
  for (int a = 0; a < n - 1; ++a) th[a] = JetD::variable(L, n + a, q.theta[a]);

  const VecX<JetD> u = sphere_direction<JetD>(th);
  const JetD f0 = m.norm<JetD>(xh, u);
  if (!(scalar_value(f0) > 0.0)) throw NonPositiveNorm("hilbert_form: F <= 0 on the ray");
  VecX<JetD> yh(n);
  const JetD inv_f0 = recip(f0);
  for (int i = 0; i < n; ++i)
    yh[i] = u[i] * inv_f0 + JetD::variable(L, 2 * n - 1 + i, 0.0);

  const JetD F = m.norm<JetD>(xh, yh);

  HilbertFormData out;
  out.omega.resize(n);
  out.curl = Mat::Zero(chart_dim, chart_dim);

  // omega_i as jets in (x, theta): the eta_i coefficient of F
  std::vector<JetD> omega_jet(n);
  for (int i = 0; i < n; ++i) {
    omega_jet[i] = F.derivative(2 * n - 1 + i);
    out.omega[i] = omega_jet[i].value();
  }

  // pullback has vanishing theta-components, so the curl is built from the
  // (x, theta)-derivatives of omega_1..omega_n alone
  for (int d = 0; d < n; ++d)
    for (int c = 0; c < chart_dim; ++c) {
      out.curl(c, d) += omega_jet[d].partial(c);
      out.curl(d, c) -= omega_jet[d].partial(c);
    }

  // g_ij y^j / F cross-expression
  const FiberPoint p(q.x, q.y);
  const auto sv = spray_values(m, p);
  out.omega_metric = (sv.g * q.y) / sv.F;

  // Reeb field xi = G/F in chart components: base part y^i / F; the angular
  // part solves (dy/dtheta) xi_theta = ydot - (dy/dx) xi_x
  Mat dy_dx(n, n), dy_dtheta(n, n - 1);
  for (int i = 0; i < n; ++i) {
    const JetD yi = u[i] * inv_f0;
    for (int j = 0; j < n; ++j) dy_dx(i, j) = yi.partial(j);
    for (int a = 0; a < n - 1; ++a) dy_dtheta(i, a) = yi.partial(n + a);
  }
  const Vec xi_x = q.y / sv.F;
  const Vec ydot = -2.0 * sv.G / sv.F;
  const Vec rhs = ydot - dy_dx * xi_x;
  const Vec xi_theta = dy_dtheta.colPivHouseholderQr().solve(rhs);
  out.xi.resize(chart_dim);
  out.xi << xi_x, xi_theta;

  out.omega_xi = out.omega.dot(xi_x);  // theta-components of the pullback vanish
  const Vec contraction = out.curl.transpose() * out.xi;
  out.max_domega_xi = contraction.cwiseAbs().maxCoeff();
  return out;
}

/// Sign and magnitude of c_n = (-1)^{-1 + n(n+1)/2} / (n-1)!.
inline double contact_constant(int n) {
  const int exponent = n * (n + 1) / 2 - 1;
  double factorial = 1.0;
  for (int k = 2; k <= n - 1; ++k) factorial *= k;
  return ((exponent % 2 == 0) ? 1.0 : -1.0) / factorial;
}

/// Coefficient of dx^1 ^ dx^2 ^ dtheta in c_n omega ^ (d omega)^{n-1}, from
/// precomputed form data.  The wedge evaluator ships for n = 2.
inline double volume_density_from(const MetricSpec& m, const HilbertFormData& h) {
  if (m.dim() != 2) throw Error("volume_density: wedge evaluator shipped for n = 2");
  const Vec omega_tilde = (Vec(3) << h.omega[0], h.omega[1], 0.0).finished();
  const double wedge = omega_tilde[0] * h.curl(1, 2) - omega_tilde[1] * h.curl(0, 2) +
                       omega_tilde[2] * h.curl(0, 1);
  const double rho = contact_constant(2) * wedge;
  if (std::abs(rho) < 1e-12)
    throw DegenerateDensity("volume density vanished at a grid node");
  return rho;
}

inline double volume_density(const MetricSpec& m, const SMChartPoint& q) {
  return volume_density_from(m, hilbert_form(m, q));
}

// ---------------------------------------------------------------------------
// Quadrature grid
// ---------------------------------------------------------------------------

/// Tensor-product nodes over (x^1, x^2, theta) with the cached contact
/// density; periodic trapezoidal weights on every axis.
struct SMGrid {
  std::array<int, 3> counts{};  // x1, x2, theta
  double theta_offset = 0.0;
  Vec x1_nodes, x2_nodes, theta_nodes;
  std::vector<double> rho;  // signed density, node-major (x1, x2, theta)
  std::vector<Vec> y;       // unit fiber vector per node
  int sign = 0;
  double cell_weight = 0.0;
  double worst_omega_xi_dev = 0.0;
  double worst_domega_xi = 0.0;

  size_t size() const { return rho.size(); }
  size_t index(int i1, int i2, int it) const {
    return (static_cast<size_t>(i1) * counts[1] + i2) * counts[2] + it;
  }
  Vec x_at(size_t idx) const {
    const int i2 = static_cast<int>((idx / counts[2]) % counts[1]);
    const int i1 = static_cast<int>(idx / (static_cast<size_t>(counts[1]) * counts[2]));
    return (Vec(2) << x1_nodes[i1], x2_nodes[i2]).finished();
  }
  FiberPoint fiber_at(size_t idx) const { return FiberPoint(x_at(idx), y[idx]); }
};

inline SMGrid build_sm_grid(const MetricSpec& m, const ChartDomain& domain,
                            std::array<int, 3> counts, double theta_offset = 0.0) {
  if (m.dim() != 2) throw Error("build_sm_grid: quadrature shipped for n = 2");
  if (!domain.is_torus()) throw Error("build_sm_grid: integration needs a torus domain");
  for (int c : counts)
    if (c < 8) throw Error("build_sm_grid: resolution must be >= 8 per axis");

  SMGrid grid;
  grid.counts = counts;
  grid.theta_offset = theta_offset;
  const double p1 = *domain.period(0), p2 = *domain.period(1);
  grid.x1_nodes.resize(counts[0]);
  for (int i = 0; i < counts[0]; ++i) grid.x1_nodes[i] = p1 * i / counts[0];
  grid.x2_nodes.resize(counts[1]);
  for (int i = 0; i < counts[1]; ++i) grid.x2_nodes[i] = p2 * i / counts[1];
  grid.theta_nodes.resize(counts[2]);
  for (int i = 0; i < counts[2]; ++i)
    grid.theta_nodes[i] = theta_offset + 2.0 * M_PI * i / counts[2];
  grid.cell_weight = (p1 / counts[0]) * (p2 / counts[1]) * (2.0 * M_PI / counts[2]);

  const size_t total = static_cast<size_t>(counts[0]) * counts[1] * counts[2];
  grid.rho.resize(total);
  grid.y.resize(total);
  std::vector<double> omega_dev(total), domega_dev(total);

  parallel_for(total, [&](size_t idx) {
    const int it = static_cast<int>(idx % counts[2]);
    const int i2 = static_cast<int>((idx / counts[2]) % counts[1]);
    const int i1 = static_cast<int>(idx / (static_cast<size_t>(counts[1]) * counts[2]));
    const Vec x = (Vec(2) << grid.x1_nodes[i1], grid.x2_nodes[i2]).finished();
    const Vec theta = (Vec(1) << grid.theta_nodes[it]).finished();
    const SMChartPoint q = sm_point(m, x, theta);
    const HilbertFormData h = hilbert_form(m, q);
    grid.rho[idx] = volume_density_from(m, h);
    grid.y[idx] = q.y;
    omega_dev[idx] = std::abs(h.omega_xi - 1.0);
    domega_dev[idx] = h.max_domega_xi;
  });

  grid.sign = grid.rho.front() > 0.0 ? 1 : -1;
  for (double r : grid.rho) {
    if ((r > 0.0 ? 1 : -1) != grid.sign)
      throw DegenerateDensity("volume density changed sign across the grid");
  }
  for (size_t i = 0; i < total; ++i) {
    grid.worst_omega_xi_dev = std::max(grid.worst_omega_xi_dev, omega_dev[i]);
    grid.worst_domega_xi = std::max(grid.worst_domega_xi, domega_dev[i]);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Integrals over SM
// ---------------------------------------------------------------------------

/// Integral of f against |rho| dx dtheta; f is evaluated at every node in
/// parallel and reduced pairwise for bit-stable results.
inline double integrate_sm(const SMGrid& grid,
                           const std::function<double(const FiberPoint&)>& f) {
  std::vector<double> terms(grid.size());
  parallel_for(grid.size(), [&](size_t idx) {
    terms[idx] = f(grid.fiber_at(idx)) * std::abs(grid.rho[idx]);
  });
  return pairwise_sum(terms) * grid.cell_weight;
}

/// Spot-check that f is 0-homogeneous in y (f lives on SM).
inline void check_zero_homogeneous(const SMGrid& grid,
                                   const std::function<double(const FiberPoint&)>& f,
                                   double tol = 1e-8) {
  const size_t stride = std::max<size_t>(1, grid.size() / 7);
  for (size_t idx = 0; idx < grid.size(); idx += stride) {
    const FiberPoint p = grid.fiber_at(idx);
    const double base = f(p);
    for (const double lambda : {0.5, 2.0}) {
      const double scaled = f(p.scaled(lambda));
      if (std::abs(scaled - base) > tol * std::max(1.0, std::abs(base)))
        throw Error("integrand is not 0-homogeneous in y");
    }
  }
}

/// integral of f dnu for a 0-homogeneous scalar given as an expression in
/// (x, y).
inline double integrate_sm_expression(const MetricSpec& m, const SMGrid& grid,
                                      const Expression& f) {
  if (m.dim() != 2) throw Error("integrate_sm_expression: quadrature shipped for n = 2");
  auto fn = [&](const FiberPoint& p) { return f.eval_d(p.x, p.y); };
  check_zero_homogeneous(grid, fn);
  return integrate_sm(grid, fn);
}

/// |integral of f-dot dnu|, the Stokes-type vanishing statement on a compact
/// boundariless SM; f-dot = xi(f) = G(f)/F.
inline double verify_stokes_lemma(const MetricSpec& m, const SMGrid& grid, const Expression& f) {
  auto fn = [&](const FiberPoint& p) { return f.eval_d(p.x, p.y); };
  check_zero_homogeneous(grid, fn);
  return std::abs(integrate_sm(grid, [&](const FiberPoint& p) {
    return dynamical_derivative_scalar(m, f, p) / eval_norm(m, p);
  }));
}

/// Total Ricci curvature T(V) = integral of g_y(R_y(V), V) / F^2 dnu.
inline double total_ricci(const MetricSpec& m, const SMGrid& grid, const VectorFieldDef& V) {
  auto integrand = [&](const FiberPoint& p) {
    const CurvatureBundle b = curvature_bundle(m, p);
    const Vec v = V.eval_d(p.x);
    return v.dot(b.g * (b.R * v)) / (b.F * b.F);
  };
  check_zero_homogeneous(grid, integrand);
  return integrate_sm(grid, integrand);
}

/// Global norm: integral of g_y(V, V) dnu.
inline double global_norm(const MetricSpec& m, const SMGrid& grid, const VectorFieldDef& V) {
  return integrate_sm(grid, [&](const FiberPoint& p) {
    const Vec v = V.eval_d(p.x);
    return v.dot(fundamental_tensor(m, p).g * v);
  });
}

/// Integral of g_y(V-dot, V-dot) dnu with V-dot = V_{|0} / F; the quantity
/// forced to vanish by the rigidity argument.
inline double parallel_energy(const MetricSpec& m, const SMGrid& grid, const VectorFieldDef& V) {
  return integrate_sm(grid, [&](const FiberPoint& p) {
    const ConnectionValues cv = connection_values(m, p);
    const Vec vdot = covariant_section_derivative(m, V, p) / cv.F;
    return vdot.dot(cv.g * vdot);
  });
}

// ---------------------------------------------------------------------------
// The pointwise identity behind the rigidity theorem
// ---------------------------------------------------------------------------

/// Defects of f_{|0} for f = g_ij V^i V^j_{|0} / F, in its product-rule form
/// (holds for every V) and its curvature form (holds when V is affine; the
/// gap is exactly g(V, jacobi)/F^2).
struct RigidityIdentity {
  double f_dd;                  // f_{|0} computed directly through jets
  double product_rule_defect;   // |f_dd - (g(W,W) + g(V, V_dd2)) / F|
  double curvature_form_defect; // |f_dd/F - (g(W,W)/F^2 - g(RV, V)/F^2)|
  double jacobi_term;           // |g(V, jacobi)| / F^2, the expected gap
};

inline RigidityIdentity theorem_4_2_identity(const MetricSpec& m, const VectorFieldDef& V,
                                             const FiberPoint& p) {
  const BundleJets B = bundle_jets(m, p);
  const int n = B.n;
  auto L11 = B.layout11();

  const VecX<JetD> W = section_first_dd_jets(B, V);
  auto L21 = jet_layout({{n, 2}, {n, 1}});
  VecX<JetD> xh(n);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(L21, i, B.x[i]);
  const VecX<JetD> vh = V(xh);

  // f = (1/F) g_ij V^i W^j as a (1,1)-capped jet
  JetD f(0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f += B.g(i, j).truncated(L11) * vh[i].truncated(L11) * W[j];
  f = f * recip(B.F.truncated(L11));

  RigidityIdentity out;
  double fdd = 0.0;
  for (int i = 0; i < n; ++i)
    fdd += B.y[i] * f.partial(i) - 2.0 * B.v.G[i] * f.partial(n + i);
  out.f_dd = fdd;

  const Vec v = V.eval_d(B.x);
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = scalar_value(W[i]);
  const Vec v_dd2 = section_dd_values(B, W);
  const double F = B.v.F, F2 = F * F;

  const double product_rule = (w.dot(B.v.g * w) + v.dot(B.v.g * v_dd2)) / F;
  out.product_rule_defect = std::abs(fdd - product_rule);

  const double curvature_form = w.dot(B.v.g * w) / F2 - v.dot(B.v.g * (B.v.R * v)) / F2;
  out.curvature_form_defect = std::abs(fdd / F - curvature_form);

  const Vec jac = v_dd2 + B.v.R * v;
  out.jacobi_term = std::abs(v.dot(B.v.g * jac)) / F2;
  return out;
}

}  // namespace finsler
