#pragma once

// Spray coefficients, nonlinear connection, Berwald coefficients, Riemann
// curvature, and dynamical derivatives.
//
// Everything is assembled from one jet evaluation of F^2 per point; formal
// jet differentiation (a coefficient shift into a reduced layout) replaces
// hand-derived formulas for the x/y-derivatives of intermediate tensors, so
// a single code path serves every metric family.  The core is templated on
// the base scalar T: production runs with T = double; tests re-run the same
// pipeline with T = Jet<double> to differentiate the computed tensors by an
// independent route.

#include <vector>

#include "finsler/expression.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// Gauss-Jordan inverse for jet-valued square matrices (pivoting on values).
template <class T>
MatX<Jet<T>> jet_matrix_inverse(MatX<Jet<T>> a) {
  const int n = static_cast<int>(a.rows());
  MatX<Jet<T>> inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = Jet<T>(i == j ? 1.0 : 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(scalar_value(a(r, col))) > std::abs(scalar_value(a(piv, col)))) piv = r;
    if (scalar_value(a(piv, col)) == 0.0) throw Error("jet_matrix_inverse: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const Jet<T> d = recip(a(col, col));
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) * d;
      inv(col, j) = inv(col, j) * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet<T> f = a(r, col);
      if (jet_is_zero(f)) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

namespace detail {

template <class T>
Mat value_matrix(const MatX<Jet<T>>& a) {
  Mat out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = scalar_value(a(i, j));
  return out;
}

/// F^2, the fundamental tensor, its inverse, and the spray coefficients as
/// jets around (x, y).  Caps: F2 at (kx, ky); g at (kx, ky-2); G at
/// (kx-1, ky-2).  Requires kx >= 1, ky >= 2.
template <class T>
struct SprayJetsT {
  using J = Jet<T>;
  int n = 0;
  LayoutPtr full;
  J F2;
  MatX<J> g;
  MatX<J> g_inv;
  VecX<J> G;
};

template <class T>
SprayJetsT<T> spray_jets_at(const MetricSpec& m, const VecX<T>& x, const VecX<T>& y, int kx,
                            int ky) {
  using J = Jet<T>;
  if (kx < 1 || ky < 2) throw Error("spray_jets_at: caps too small");
  const int n = m.dim();
  SprayJetsT<T> out;
  out.n = n;
  out.full = jet_layout({{n, kx}, {n, ky}});

  VecX<J> xh(n), yh(n);
  for (int i = 0; i < n; ++i) {
    xh[i] = J::variable(out.full, i, x[i]);
    yh[i] = J::variable(out.full, n + i, y[i]);
  }
  out.F2 = m.energy(xh, yh);
  if (!(scalar_value(out.F2) > 0.0))
    throw NonPositiveNorm("F^2 <= 0 at a nonzero tangent vector");

  out.g.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const J di = out.F2.derivative(n + i);
    for (int j = i; j < n; ++j) {
      out.g(i, j) = 0.5 * di.derivative(n + j);
      if (j != i) out.g(j, i) = out.g(i, j);
    }
  }

  {
    Eigen::LLT<Mat> llt(value_matrix(out.g));
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("fundamental tensor not positive-definite");
  }
  out.g_inv = jet_matrix_inverse(out.g);

  // G^i = 1/4 g^{il} ( [g_jl]_{x^k} + [g_lk]_{x^j} - [g_jk]_{x^l} ) y^j y^k
  const auto Lg = jet_layout({{n, kx - 1}, {n, ky - 2}});
  std::vector<MatX<J>> dg(n, MatX<J>(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg[k](i, j) = out.g(i, j).derivative(k);

  // y seeded as variables when the target caps allow it; at cap 0 the
  // contraction only needs values
  VecX<J> Yt(n);
  const bool y_cap_left = ky - 2 >= 1;
  for (int j = 0; j < n; ++j)
    Yt[j] = y_cap_left ? J::variable(Lg, n + j, y[j]) : J::constant(Lg, y[j]);
  MatX<J> YY(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      YY(j, k) = Yt[j] * Yt[k];
      if (k != j) YY(k, j) = YY(j, k);
    }

  VecX<J> S(n);
  for (int l = 0; l < n; ++l) {
    J acc(0.0);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        acc += (dg[k](j, l) + dg[j](l, k) - dg[l](j, k)) * YY(j, k);
    S[l] = acc;
  }

  out.G.resize(n);
  for (int i = 0; i < n; ++i) {
    J acc(0.0);
    for (int l = 0; l < n; ++l) acc += out.g_inv(i, l).truncated(Lg) * S[l];
    out.G[i] = 0.25 * acc;
  }
  return out;
}

inline SprayJetsT<double> spray_jets(const MetricSpec& m, const FiberPoint& p, int kx, int ky) {
  return spray_jets_at<double>(m, p.x, p.y, kx, ky);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Value-level products
// ---------------------------------------------------------------------------

/// F, g, g^{-1}, G at a point (cheap path for ODE right-hand sides).
struct SprayValues {
  double F = 0;
  Mat g;
  Mat g_inv;
  Vec G;
};

inline SprayValues spray_values(const MetricSpec& m, const FiberPoint& p) {
  const auto sj = detail::spray_jets(m, p, 1, 2);
  SprayValues out;
  out.F = std::sqrt(sj.F2.value());
  out.g = detail::value_matrix(sj.g);
  out.g_inv = detail::value_matrix(sj.g_inv);
  out.G.resize(sj.n);
  for (int i = 0; i < sj.n; ++i) out.G[i] = sj.G[i].value();
  return out;
}

/// Adds the nonlinear connection N^i_j (used by first covariant derivatives).
struct ConnectionValues {
  double F = 0;
  Mat g;
  Mat g_inv;
  Vec G;
  Mat N;  // N(i, j) = N^i_j
};

inline ConnectionValues connection_values(const MetricSpec& m, const FiberPoint& p) {
  const auto sj = detail::spray_jets(m, p, 1, 3);
  const int n = sj.n;
  ConnectionValues out;
  out.F = std::sqrt(sj.F2.value());
  out.g = detail::value_matrix(sj.g);
  out.g_inv = detail::value_matrix(sj.g_inv);
  out.G.resize(n);
  out.N.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.G[i] = sj.G[i].value();
    for (int j = 0; j < n; ++j) out.N(i, j) = sj.G[i].partial(n + j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full curvature bundle
// ---------------------------------------------------------------------------

/// All pointwise tensors of the spray geometry at one fiber point.
struct CurvatureBundle {
  double F = 0;
  Mat g;
  Mat g_inv;
  Vec G;                   // spray coefficients G^i
  Mat N;                   // N^i_j
  std::vector<Mat> Gamma;  // Gamma[i](j, k) = Gamma^i_{jk}
  Mat R;                   // R(j, i) = R^j_i
};

/// Jet-valued bundle retaining enough caps to differentiate sections once
/// more (theorem-level identities, complete lifts, brackets).
struct BundleJets {
  int n = 0;
  Vec x, y;
  JetD F2;             // caps (2, 4)
  JetD F;              // caps (2, 4)
  MatX<JetD> g;        // caps (2, 2)
  MatX<JetD> g_inv;    // caps (2, 2)
  VecX<JetD> G;        // caps (1, 2)
  MatX<JetD> N;        // caps (1, 1)
  CurvatureBundle v;   // extracted values
  Mat dGdx;            // dGdx(i, k) = d G^i / d x^k
  std::vector<Mat> dNdx;  // dNdx[k](i, j) = d N^i_j / d x^k

  LayoutPtr layout11() const { return N(0, 0).layout(); }
};

inline BundleJets bundle_jets(const MetricSpec& m, const FiberPoint& p) {
  auto sj = detail::spray_jets(m, p, 2, 4);
  const int n = sj.n;
  BundleJets B;
  B.n = n;
  B.x = p.x;
  B.y = p.y;
  B.F2 = sj.F2;
  B.F = sqrt(sj.F2);
  B.g = std::move(sj.g);
  B.g_inv = std::move(sj.g_inv);
  B.G = std::move(sj.G);

  B.N.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B.N(i, j) = B.G[i].derivative(n + j);

  B.v.F = B.F.value();
  B.v.g = detail::value_matrix(B.g);
  B.v.g_inv = detail::value_matrix(B.g_inv);
  B.v.G.resize(n);
  for (int i = 0; i < n; ++i) B.v.G[i] = B.G[i].value();
  B.v.N = detail::value_matrix(B.N);

  B.v.Gamma.assign(n, Mat::Zero(n, n));
  B.dNdx.assign(n, Mat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        B.v.Gamma[i](j, k) = B.N(i, j).partial(n + k);
        B.dNdx[k](i, j) = B.N(i, j).partial(k);
      }
    }

  B.dGdx.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) B.dGdx(i, k) = B.G[i].partial(k);

  // R^j_i = 2 [G^j]_{x^i} - G(N^j_i) - N^j_k N^k_i with
  // G(N^j_i) = y^k d_{x^k} N^j_i - 2 G^k Gamma^j_{ik}
  B.v.R.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double gn = 0.0;
      for (int k = 0; k < n; ++k)
        gn += p.y[k] * B.dNdx[k](j, i) - 2.0 * B.v.G[k] * B.v.Gamma[j](i, k);
      double nn = 0.0;
      for (int k = 0; k < n; ++k) nn += B.v.N(j, k) * B.v.N(k, i);
      B.v.R(j, i) = 2.0 * B.dGdx(j, i) - gn - nn;
    }
  return B;
}

inline CurvatureBundle curvature_bundle(const MetricSpec& m, const FiberPoint& p) {
  return bundle_jets(m, p).v;
}

// ---------------------------------------------------------------------------
// Module operations
// ---------------------------------------------------------------------------

inline Vec spray_coefficients(const MetricSpec& m, const FiberPoint& p) {
  return spray_values(m, p).G;
}

inline Mat riemann_curvature(const MetricSpec& m, const FiberPoint& p) {
  return curvature_bundle(m, p).R;
}

inline std::vector<Mat> berwald_coefficients(const MetricSpec& m, const FiberPoint& p) {
  return curvature_bundle(m, p).Gamma;
}

/// g_{ij|0} = G(g_ij) - g_kj N^k_i - g_ik N^k_j; identically zero for any
/// Finsler metric, returned for inspection.
inline Mat metric_compatibility(const MetricSpec& m, const FiberPoint& p) {
  const BundleJets B = bundle_jets(m, p);
  const int n = B.n;
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double gf = 0.0;
      for (int k = 0; k < n; ++k)
        gf += B.y[k] * B.g(i, j).partial(k) - 2.0 * B.v.G[k] * B.g(i, j).partial(n + k);
      for (int k = 0; k < n; ++k)
        gf -= B.v.g(k, j) * B.v.N(k, i) + B.v.g(i, k) * B.v.N(k, j);
      out(i, j) = gf;
    }
  return out;
}

/// f_{|0} = G(f) = y^i df/dx^i - 2 G^i df/dy^i for a scalar f on TM_0.
inline double dynamical_derivative_scalar(const MetricSpec& m, const Expression& f,
                                          const FiberPoint& p) {
  const int n = m.dim();
  const SprayValues sv = spray_values(m, p);
  auto L = jet_layout({{n, 1}, {n, 1}});
  VecX<JetD> xh(n), yh(n);
  for (int i = 0; i < n; ++i) {
    xh[i] = JetD::variable(L, i, p.x[i]);
    yh[i] = JetD::variable(L, n + i, p.y[i]);
  }
  const JetD fh = f(xh, yh);
  double out = 0.0;
  for (int i = 0; i < n; ++i) out += p.y[i] * fh.partial(i) - 2.0 * sv.G[i] * fh.partial(n + i);
  return out;
}

/// V^i_{|0} = y^j dV^i/dx^j + V^k N^i_k for a base vector field V.
inline Vec covariant_section_derivative(const MetricSpec& m, const VectorFieldDef& V,
                                        const FiberPoint& p) {
  const int n = m.dim();
  const ConnectionValues cv = connection_values(m, p);
  auto Lx = jet_layout({{n, 1}});
  VecX<JetD> xh(n);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(Lx, i, p.x[i]);
  const VecX<JetD> vh = V(xh);
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += p.y[j] * vh[i].partial(j);
    for (int k = 0; k < n; ++k) acc += vh[k].value() * cv.N(i, k);
    out[i] = acc;
  }
  return out;
}

/// V_{|0} as a (1,1)-capped jet section, differentiable once more.
inline VecX<JetD> section_first_dd_jets(const BundleJets& B, const VectorFieldDef& V) {
  const int n = B.n;
  auto L21 = jet_layout({{n, 2}, {n, 1}});
  auto L11 = B.layout11();
  VecX<JetD> xh(n);
  for (int i = 0; i < n; ++i) xh[i] = JetD::variable(L21, i, B.x[i]);
  const VecX<JetD> vh = V(xh);

  VecX<JetD> yh(n);
  for (int j = 0; j < n; ++j) yh[j] = JetD::variable(L11, n + j, B.y[j]);

  VecX<JetD> W(n);
  for (int i = 0; i < n; ++i) {
    JetD acc(0.0);
    for (int j = 0; j < n; ++j) acc += yh[j] * vh[i].derivative(j).truncated(L11);
    for (int k = 0; k < n; ++k) acc += vh[k].truncated(L11) * B.N(i, k);
    W[i] = acc;
  }
  return W;
}

/// W^i_{|0} = G(W^i) + W^k N^i_k for a jet-valued section W (values only).
inline Vec section_dd_values(const BundleJets& B, const VecX<JetD>& W) {
  const int n = B.n;
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += B.y[j] * W[i].partial(j) - 2.0 * B.v.G[j] * W[i].partial(n + j);
    for (int k = 0; k < n; ++k) acc += scalar_value(W[k]) * B.v.N(i, k);
    out[i] = acc;
  }
  return out;
}

/// V^i_{|0|0}: the dynamical derivative applied twice to a base field.
inline Vec second_dynamical_derivative(const MetricSpec& m, const VectorFieldDef& V,
                                       const FiberPoint& p) {
  const BundleJets B = bundle_jets(m, p);
  return section_dd_values(B, section_first_dd_jets(B, V));
}

}  // namespace finsler
