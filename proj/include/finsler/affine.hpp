#pragma once

// The three characterizations of affine vector fields and the parallelness
// test.  jacobi_residual and bracket_residual are two genuinely different
// assembly routes for the same vertical vector field [G, V-hat]; their
// agreement is the working cross-check of the whole tensor chain.

#include <span>
#include <vector>

#include "finsler/sampling.hpp"
#include "finsler/spray.hpp"

namespace finsler {

struct CompleteLift {
  Vec horizontal;             // V^i (delta/delta x components)
  Vec vertical;               // V^i_{|0} (d/dy components)
  Vec vertical_coordinate;    // y^j dV^i/dx^j (d/dy components in the coordinate frame)
};

/// V-hat = V^i delta/delta x^i + V^i_{|0} d/dy^i at p, together with the
/// coordinate-frame vertical part for the basis-change identity
/// V^i_{|0} = y^j dV^i/dx^j + V^k N^i_k.
inline CompleteLift complete_lift(const MetricSpec& m, const VectorFieldDef& V,
                                  const FiberPoint& p) {
  const int n = m.dim();
  CompleteLift out;
  out.horizontal = V.eval_d(p.x);
  out.vertical = covariant_section_derivative(m, V, p);
  auto Lx = jet_layout({{n, 1}});
  VecX<JetD> xh(n);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(Lx, i, p.x[i]);
  const VecX<JetD> vh = V(xh);
  out.vertical_coordinate.resize(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += p.y[j] * vh[i].partial(j);
    out.vertical_coordinate[i] = acc;
  }
  return out;
}

/// V^i_{|0|0} + V^k R^i_k; identically zero iff V is affine.
inline Vec jacobi_residual_with_bundle(const BundleJets& B, const VectorFieldDef& V) {
  const Vec second = section_dd_values(B, section_first_dd_jets(B, V));
  return second + B.v.R * V.eval_d(B.x);
}

inline Vec jacobi_residual(const MetricSpec& m, const VectorFieldDef& V, const FiberPoint& p) {
  return jacobi_residual_with_bundle(bundle_jets(m, p), V);
}

/// Vertical components of [G, V-hat], assembled in the coordinate frame
/// (d/dx, d/dy) from first derivatives of the two component functions and
/// then projected onto (delta/delta x, d/dy).  Throws HorizontalLeak when the
/// horizontal part exceeds tolerance, which would signal a differentiation
/// bug rather than geometry.
inline Vec bracket_residual_with_bundle(const BundleJets& B, const VectorFieldDef& V,
                                        double leak_tolerance = 1e-8) {
  const int n = B.n;
  auto L2 = jet_layout({{n, 2}});
  VecX<JetD> xh(n);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(L2, i, B.x[i]);
  const VecX<JetD> vh = V(xh);  // values + two x-derivatives

  // components of V-hat: (V^i, (y dV)^i), and of G: (y^i, -2 G^i)
  Vec v_val(n), ydv(n);
  Mat dv(n, n);  // dv(i, j) = dV^i/dx^j
  for (int i = 0; i < n; ++i) {
    v_val[i] = vh[i].value();
    for (int j = 0; j < n; ++j) dv(i, j) = vh[i].partial(j);
  }
  ydv = dv * B.y;

  Vec Zx(n), Zy(n);
  for (int c = 0; c < n; ++c) {
    // horizontal: A(V^c) - B(y^c) = (y dV)^c - (y dV)^c; kept symbolic so a
    // differentiation bug shows up as a leak
    double a_on_b = 0.0;
    for (int a = 0; a < n; ++a) a_on_b += B.y[a] * dv(c, a);
    Zx[c] = a_on_b - ydv[c];

    // vertical: A((y dV)^c) - B(-2 G^c)
    double a_vert = 0.0;
    for (int a = 0; a < n; ++a) {
      double d_xa = 0.0;  // d/dx^a of (y dV)^c
      for (int j = 0; j < n; ++j) {
        std::vector<int> e(n, 0);
        e[a] += 1;
        e[j] += 1;
        const double factorial = (a == j) ? 2.0 : 1.0;
        d_xa += B.y[j] * vh[c].taylor_coefficient(e) * factorial;
      }
      a_vert += B.y[a] * d_xa - 2.0 * B.v.G[a] * dv(c, a);
    }
    double b_vert = 0.0;
    for (int a = 0; a < n; ++a)
      b_vert += v_val[a] * (-2.0 * B.dGdx(c, a)) + ydv[a] * (-2.0 * B.v.N(c, a));
    Zy[c] = a_vert - b_vert;
  }

  const double v_scale = std::max(1.0, v_val.norm());
  if (Zx.norm() > leak_tolerance * B.v.F * v_scale)
    throw HorizontalLeak("bracket [G, V-hat] horizontal component " +
                         std::to_string(Zx.norm()));

  // project onto the (delta/delta x, d/dy) frame
  Vec vertical = Zy + B.v.N * Zx;
  return vertical;
}

inline Vec bracket_residual(const MetricSpec& m, const VectorFieldDef& V, const FiberPoint& p) {
  return bracket_residual_with_bundle(bundle_jets(m, p), V);
}

/// All three pointwise residuals at one fiber point.
struct AffineDiagnostics {
  Vec jacobi;
  Vec bracket;
  Vec parallel;  // V_{|0}
};

inline AffineDiagnostics affine_diagnostics(const MetricSpec& m, const VectorFieldDef& V,
                                            const FiberPoint& p) {
  const BundleJets B = bundle_jets(m, p);
  AffineDiagnostics out;
  out.jacobi = jacobi_residual_with_bundle(B, V);
  out.bracket = bracket_residual_with_bundle(B, V);
  out.parallel = covariant_section_derivative(m, V, p);
  return out;
}

/// Worst-case |V_{|0}|_g / (F |V|_g) over the sample set; zero iff V is
/// linearly parallel on the samples.  Points where V vanishes identically
/// are skipped (the normalization degenerates).
inline double parallel_residual(const MetricSpec& m, const VectorFieldDef& V,
                                std::span<const FiberPoint> samples) {
  if (samples.empty()) throw Error("parallel_residual: empty sample set");
  double worst = 0.0;
  for (const FiberPoint& p : samples) {
    const ConnectionValues cv = connection_values(m, p);
    const Vec v = V.eval_d(p.x);
    const double vnorm = std::sqrt(v.dot(cv.g * v));
    if (vnorm == 0.0) continue;
    const Vec dd = covariant_section_derivative(m, V, p);
    const double ddnorm = std::sqrt(dd.dot(cv.g * dd));
    worst = std::max(worst, ddnorm / (cv.F * vnorm));
  }
  return worst;
}

/// Summary of the affine diagnostics over seeded random fiber points,
/// scale-normalized the way the characterization tolerances are stated.
struct AffineSampleSummary {
  int samples = 0;
  double max_jacobi_bracket_gap = 0.0;  // |jacobi - bracket| / (F^2 max(1, |V|_g))
  double max_jacobi = 0.0;              // |jacobi|_g / (F^2 max(1, |V|_g))
  double worst_parallel = 0.0;          // parallel_residual over the same samples
};

inline AffineSampleSummary affine_sample_summary(const MetricSpec& m, const ChartDomain& domain,
                                                 const VectorFieldDef& V, int count,
                                                 uint64_t seed) {
  SampleRng rng(seed);
  AffineSampleSummary out;
  out.samples = count;
  std::vector<FiberPoint> pts;
  pts.reserve(count);
  for (int s = 0; s < count; ++s) pts.push_back(rng.fiber_point(domain));
  for (const FiberPoint& p : pts) {
    const BundleJets B = bundle_jets(m, p);
    const Vec jac = jacobi_residual_with_bundle(B, V);
    const Vec bra = bracket_residual_with_bundle(B, V);
    const Vec v = V.eval_d(p.x);
    const double vnorm_g = std::sqrt(v.dot(B.v.g * v));
    const double scale = B.v.F * B.v.F * std::max(1.0, vnorm_g);
    out.max_jacobi_bracket_gap = std::max(out.max_jacobi_bracket_gap, (jac - bra).norm() / scale);
    const double jac_g = std::sqrt(jac.dot(B.v.g * jac));
    out.max_jacobi = std::max(out.max_jacobi, jac_g / scale);
  }
  out.worst_parallel = parallel_residual(m, V, pts);
  return out;
}

// ---------------------------------------------------------------------------
// Reversibility
// ---------------------------------------------------------------------------

/// lambda(F) = sup F(x, -y) over unit vectors F(x, y) = 1, sampled on a
/// uniform angular grid (shipped for n = 2) times a chart grid.
inline double reversibility(const MetricSpec& m, const ChartDomain& domain,
                            int angular_resolution, int chart_resolution = 16) {
  if (m.dim() != 2) throw Error("reversibility: angular sampling shipped for n = 2");
  if (angular_resolution < 8 || chart_resolution < 8)
    throw Error("reversibility: resolution must be >= 8 per axis");
  const int n = 2;
  std::vector<Vec> xs;
  {
    std::vector<double> axis[2];
    for (int i = 0; i < n; ++i) {
      const double extent = domain.period(i) ? *domain.period(i) : 2.0;
      const double origin = domain.period(i) ? 0.0 : -1.0;
      for (int k = 0; k < chart_resolution; ++k)
        axis[i].push_back(origin + extent * k / chart_resolution);
    }
    for (double x1 : axis[0])
      for (double x2 : axis[1]) xs.push_back((Vec(2) << x1, x2).finished());
  }
  double sup = 1.0;  // lambda(F) >= 1 for every Finsler metric
  for (const Vec& x : xs) {
    for (int k = 0; k < angular_resolution; ++k) {
      const double theta = 2.0 * M_PI * k / angular_resolution;
      const Vec u = (Vec(2) << std::cos(theta), std::sin(theta)).finished();
      const double f = m.norm<double>(x, u);
      if (!(f > 0.0)) throw NonPositiveNorm("reversibility: F <= 0 on the indicatrix grid");
      const Vec y = u / f;
      sup = std::max(sup, m.norm<double>(x, Vec(-y)));
    }
  }
  return sup;
}

}  // namespace finsler
