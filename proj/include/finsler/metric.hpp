#pragma once

// Finsler metric families and the fundamental tensor.
//
// A MetricSpec evaluates F (and F^2) through any scalar type, in particular
// jets, which is how every derived tensor in the library obtains its
// derivatives.  The closed registry: Euclidean-quadratic, Riemannian,
// Randers, and custom analytic expressions.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "finsler/expression.hpp"
#include "finsler/jet.hpp"
#include "finsler/types.hpp"

namespace finsler {

class MetricSpec {
 public:
  /// F = sqrt(y^T A y) with A constant symmetric positive-definite.
  static MetricSpec euclidean(Mat A);

  /// F = sqrt(a_ij(x) y^i y^j); entries are expressions in x, row-major.
  static MetricSpec riemannian(int dim, std::vector<Expression> a_entries);

  /// F = sqrt(a_ij y^i y^j) + b_i(x) y^i.
  static MetricSpec randers(int dim, std::vector<Expression> a_entries,
                            std::vector<Expression> b_entries);

  /// F given directly as a positively 1-homogeneous expression in (x, y).
  static MetricSpec custom(int dim, Expression F);

  int dim() const { return dim_; }
  const std::string& family() const { return family_; }

  template <class S>
  S norm(const VecX<S>& x, const VecX<S>& y) const;

  /// F^2; polynomial (sqrt-free) for quadratic families.
  template <class S>
  S energy(const VecX<S>& x, const VecX<S>& y) const;

 private:
  struct Euclidean {
    Mat A;
  };
  struct Riemannian {
    std::vector<Expression> a;  // dim*dim, row-major
  };
  struct Randers {
    std::vector<Expression> a;
    std::vector<Expression> b;
  };
  struct Custom {
    Expression F;
  };

  template <class S>
  MatX<S> eval_matrix(const std::vector<Expression>& entries, const VecX<S>& x) const;

  int dim_ = 0;
  std::string family_;
  std::variant<Euclidean, Riemannian, Randers, Custom> data_;
};

// ---------------------------------------------------------------------------

inline MetricSpec MetricSpec::euclidean(Mat A) {
  if (A.rows() != A.cols() || A.rows() < 2) throw Error("euclidean metric: bad matrix shape");
  if (!A.isApprox(A.transpose(), 1e-12)) throw Error("euclidean metric: matrix not symmetric");
  MetricSpec m;
  m.dim_ = static_cast<int>(A.rows());
  m.family_ = "euclidean";
  m.data_ = Euclidean{std::move(A)};
  return m;
}

inline MetricSpec MetricSpec::riemannian(int dim, std::vector<Expression> a_entries) {
  if (static_cast<int>(a_entries.size()) != dim * dim)
    throw Error("riemannian metric: expected dim*dim entries");
  MetricSpec m;
  m.dim_ = dim;
  m.family_ = "riemannian";
  m.data_ = Riemannian{std::move(a_entries)};
  return m;
}

inline MetricSpec MetricSpec::randers(int dim, std::vector<Expression> a_entries,
                                      std::vector<Expression> b_entries) {
  if (static_cast<int>(a_entries.size()) != dim * dim)
    throw Error("randers metric: expected dim*dim entries for a");
  if (static_cast<int>(b_entries.size()) != dim)
    throw Error("randers metric: expected dim entries for b");
  MetricSpec m;
  m.dim_ = dim;
  m.family_ = "randers";
  m.data_ = Randers{std::move(a_entries), std::move(b_entries)};
  return m;
}

inline MetricSpec MetricSpec::custom(int dim, Expression F) {
  MetricSpec m;
  m.dim_ = dim;
  m.family_ = "custom";
  m.data_ = Custom{std::move(F)};
  return m;
}

template <class S>
MatX<S> MetricSpec::eval_matrix(const std::vector<Expression>& entries, const VecX<S>& x) const {
  MatX<S> a(dim_, dim_);
  VecX<S> dummy_y;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) a(i, j) = entries[i * dim_ + j](x, dummy_y);
  return a;
}

namespace detail {

template <class MS, class S>
S quadratic_form(const MatX<MS>& a, const VecX<S>& y) {
  S acc(0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) acc += y[i] * y[j] * a(i, j);
  return acc;
}

}  // namespace detail

template <class S>
S MetricSpec::energy(const VecX<S>& x, const VecX<S>& y) const {
  if (const auto* e = std::get_if<Euclidean>(&data_)) return detail::quadratic_form(e->A, y);
  if (const auto* r = std::get_if<Riemannian>(&data_))
    return detail::quadratic_form(eval_matrix(r->a, x), y);
  const S f = norm(x, y);
  return f * f;
}

template <class S>
S MetricSpec::norm(const VecX<S>& x, const VecX<S>& y) const {
  using std::sqrt;
  if (const auto* e = std::get_if<Euclidean>(&data_))
    return sqrt(detail::quadratic_form(e->A, y));
  if (const auto* r = std::get_if<Riemannian>(&data_))
    return sqrt(detail::quadratic_form(eval_matrix(r->a, x), y));
  if (const auto* rd = std::get_if<Randers>(&data_)) {
    const MatX<S> a = eval_matrix(rd->a, x);
    S beta(0.0);
    VecX<S> dummy_y;
    for (int i = 0; i < dim_; ++i) beta += rd->b[i](x, dummy_y) * y[i];
    return sqrt(detail::quadratic_form(a, y)) + beta;
  }
  return std::get<Custom>(data_).F(x, y);
}

// ---------------------------------------------------------------------------
// Pointwise operations
// ---------------------------------------------------------------------------

/// F(x, y); throws ZeroVector on y = 0 and NonPositiveNorm if the metric data
/// fails to produce a positive norm.
inline double eval_norm(const MetricSpec& m, const FiberPoint& p) {
  const double f = m.norm<double>(p.x, p.y);
  if (!(f > 0.0)) throw NonPositiveNorm("F = " + std::to_string(f) + " at a nonzero vector");
  return f;
}

/// F^2 seeded as a jet in y only (x frozen), cap `ky`.
inline JetD energy_jet_y(const MetricSpec& m, const FiberPoint& p, int ky) {
  const int n = m.dim();
  auto L = jet_layout({{n, ky}});
  VecX<JetD> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = JetD(p.x[i]);
    y[i] = JetD::variable(L, i, p.y[i]);
  }
  return m.energy<JetD>(x, y);
}

struct FundamentalTensor {
  Mat g;
  Mat g_inv;
};

/// g_ij = [F^2]_{y^i y^j} / 2 with its inverse; throws NotPositiveDefinite
/// when the Cholesky factorization fails.
inline FundamentalTensor fundamental_tensor(const MetricSpec& m, const FiberPoint& p) {
  const int n = m.dim();
  const JetD L = energy_jet_y(m, p, 2);
  if (!(L.value() > 0.0)) throw NonPositiveNorm("F^2 <= 0 at a nonzero vector");
  FundamentalTensor out;
  out.g.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const JetD di = L.derivative(i);
    for (int j = 0; j < n; ++j) out.g(i, j) = 0.5 * di.partial(j);
  }
  out.g = 0.5 * (out.g + out.g.transpose()).eval();  // symmetrize roundoff
  Eigen::LLT<Mat> llt(out.g);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("fundamental tensor not positive-definite");
  out.g_inv = llt.solve(Mat::Identity(n, n));
  return out;
}

/// g_y(u, v) at p.
inline double fiber_inner(const MetricSpec& m, const FiberPoint& p, const Vec& u, const Vec& v) {
  return u.dot(fundamental_tensor(m, p).g * v);
}

// ---------------------------------------------------------------------------
// Axiom validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  int samples = 0;
  double worst_homogeneity = 0.0;   // relative
  double worst_euler = 0.0;         // relative, g_ij y^i y^j vs F^2
  double min_norm = 0.0;            // minimum F over samples
  double min_g_eigenvalue = 0.0;
  int positivity_failures = 0;
  int definiteness_failures = 0;
  std::string worst_location;
  bool passed(double tol = 1e-9) const {
    return positivity_failures == 0 && definiteness_failures == 0 &&
           worst_homogeneity < tol && worst_euler < tol;
  }
};

class SampleRng;
ValidationReport validate_metric(const MetricSpec& m, const ChartDomain& domain,
                                 int sample_count, uint64_t seed);

}  // namespace finsler
