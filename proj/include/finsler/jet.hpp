#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet stores the Taylor coefficients of a smooth function around an
// evaluation point, in a fixed set of formal variables partitioned into
// groups, truncated at a per-group total degree cap.  Running a computation
// in jet arithmetic yields the exact mixed partial derivatives of the result
// up to the caps, at machine precision.  Formal differentiation is a
// coefficient shift into the layout with the corresponding cap reduced by
// one, so derived quantities remain differentiable as long as their caps
// allow.
//
// The coefficient type is templated so jets can be nested (Jet<Jet<double>>)
// when a test wants a second, independent differentiation route.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

struct JetGroup {
  int vars = 0;
  int cap = 0;
};

class JetLayout;
using LayoutPtr = std::shared_ptr<const JetLayout>;

/// Canonical (cached) layout for the given variable groups.  Layouts are
/// shared and compared by pointer.
LayoutPtr jet_layout(const std::vector<JetGroup>& groups);

class JetLayout {
 public:
  int num_vars() const { return nvars_; }
  int size() const { return size_; }
  int max_total_degree() const { return max_degree_; }
  const std::vector<JetGroup>& groups() const { return groups_; }
  int group_of_var(int var) const { return var_group_.at(var); }

  /// Index of the degree-one monomial of `var`; its coefficient is the first
  /// partial derivative.
  int linear_index(int var) const { return linear_index_.at(var); }

  /// Exponents of monomial m, one entry per variable.
  const int* exponents(int m) const { return exps_.data() + m * nvars_; }

  /// Index of the product monomial, or -1 if it is truncated away.
  int32_t product_index(int a, int b) const { return mult_[a * size_ + b]; }

  int monomial_index(const std::vector<int>& exps) const;  // -1 if absent

  struct DerivMap {
    LayoutPtr target;
    std::vector<int32_t> source;  // per target monomial
    std::vector<double> factor;
  };
  const DerivMap& derivative_map(int var) const;

  struct TruncMap {
    LayoutPtr target;
    std::vector<int32_t> source;
  };
  /// Mapping onto a layout with caps <= this layout's caps (same groups).
  TruncMap truncation_map(const LayoutPtr& target) const;

 private:
  friend LayoutPtr jet_layout(const std::vector<JetGroup>&);
  explicit JetLayout(std::vector<JetGroup> groups);
  void build_derivative_maps();

  std::vector<JetGroup> groups_;
  int nvars_ = 0;
  int size_ = 0;
  int max_degree_ = 0;
  std::vector<int> var_group_;
  std::vector<int> linear_index_;
  std::vector<int> exps_;           // size_ * nvars_
  std::vector<int32_t> mult_;       // size_ * size_
  std::map<std::vector<int>, int> index_of_;
  std::vector<DerivMap> deriv_;     // one per variable (empty target if cap 0)
};

// ---------------------------------------------------------------------------

inline double scalar_value(double x) { return x; }

template <class T>
class Jet;

template <class T>
double scalar_value(const Jet<T>& j);

inline bool jet_is_zero(double x) { return x == 0.0; }

template <class T>
bool jet_is_zero(const Jet<T>& j);

template <class T = double>
class Jet {
 public:
  using Coeffs = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  /// Constant zero (layout-free; combines with any operand).
  Jet() : c_(1) { c_[0] = T(0); }
  Jet(double v) : c_(1) { c_[0] = T(v); }  // NOLINT: implicit by design
  Jet(int v) : Jet(static_cast<double>(v)) {}
  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  explicit Jet(const T& v) : c_(1) {
    c_[0] = v;
  }

  static Jet constant(const LayoutPtr& layout, const T& v) {
    Jet j;
    j.layout_ = layout;
    j.c_ = Coeffs::Constant(layout->size(), T(0));
    j.c_[0] = v;
    return j;
  }

  static Jet variable(const LayoutPtr& layout, int var, const T& v) {
    Jet j = constant(layout, v);
    const int idx = layout->linear_index(var);
    if (idx < 0) throw Error("Jet: variable seeded in a cap-0 group");
    j.c_[idx] = T(1);
    return j;
  }

  bool is_constant() const { return layout_ == nullptr; }
  const LayoutPtr& layout() const { return layout_; }
  const T& value() const { return c_[0]; }
  const Coeffs& coeffs() const { return c_; }

  /// First partial derivative with respect to `var`.
  T partial(int var) const {
    if (is_constant()) return T(0);
    const int idx = layout_->linear_index(var);
    if (idx < 0) throw Error("Jet: first partial truncated away (cap-0 group)");
    return c_[idx];
  }

  /// Taylor coefficient for the given exponent vector (0 if truncated away).
  T taylor_coefficient(const std::vector<int>& exps) const {
    if (is_constant()) {
      for (int e : exps)
        if (e != 0) return T(0);
      return c_[0];
    }
    const int idx = layout_->monomial_index(exps);
    if (idx < 0) throw Error("Jet: coefficient outside layout caps");
    return c_[idx];
  }

  /// Formal derivative; the result lives in the layout with the variable's
  /// group cap reduced by one, so every retained coefficient is exact.
  Jet derivative(int var) const {
    if (is_constant()) return Jet(T(0));
    const auto& dm = layout_->derivative_map(var);
    if (!dm.target)
      throw Error("Jet: derivative exhausts group cap; enlarge the layout");
    Jet out;
    out.layout_ = dm.target;
    out.c_.resize(dm.target->size());
    for (int t = 0; t < dm.target->size(); ++t)
      out.c_[t] = c_[dm.source[t]] * dm.factor[t];
    return out;
  }

  /// Truncation onto a layout with smaller (or equal) caps.
  Jet truncated(const LayoutPtr& target) const {
    if (is_constant()) return *this;
    if (target == layout_) return *this;
    const auto tm = layout_->truncation_map(target);
    Jet out;
    out.layout_ = target;
    out.c_.resize(target->size());
    for (int t = 0; t < target->size(); ++t) out.c_[t] = c_[tm.source[t]];
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (int i = 0; i < out.c_.size(); ++i) out.c_[i] = -out.c_[i];
    return out;
  }

  Jet& operator+=(const Jet& o) {
    align(o);
    if (o.is_constant()) {
      c_[0] += o.c_[0];
    } else {
      for (int i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    }
    return *this;
  }

  Jet& operator-=(const Jet& o) {
    align(o);
    if (o.is_constant()) {
      c_[0] -= o.c_[0];
    } else {
      for (int i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    }
    return *this;
  }

  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }

  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.is_constant()) return scaled(b, a.c_[0]);
    if (b.is_constant()) return scaled(a, b.c_[0]);
    if (a.layout_ != b.layout_) throw Error("Jet: layout mismatch in product");
    const JetLayout& L = *a.layout_;
    const int n = L.size();
    Jet out = constant(a.layout_, T(0));
    for (int i = 0; i < n; ++i) {
      if (jet_is_zero(a.c_[i])) continue;
      const T& ai = a.c_[i];
      for (int j = 0; j < n; ++j) {
        const int32_t k = L.product_index(i, j);
        if (k >= 0 && !jet_is_zero(b.c_[j])) out.c_[k] += ai * b.c_[j];
      }
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }

  // double mixed ops
  friend Jet operator+(Jet a, double s) {
    a.c_[0] += T(s);
    return a;
  }
  friend Jet operator+(double s, Jet a) { return std::move(a) + s; }
  friend Jet operator-(Jet a, double s) {
    a.c_[0] -= T(s);
    return a;
  }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(const Jet& a, double s) { return scaled(a, T(s)); }
  friend Jet operator*(double s, const Jet& a) { return scaled(a, T(s)); }
  friend Jet operator/(const Jet& a, double s) { return scaled(a, T(1.0 / s)); }
  friend Jet operator/(double s, const Jet& a) { return recip(a) * s; }

  Jet& operator+=(double s) { c_[0] += T(s); return *this; }
  Jet& operator-=(double s) { c_[0] -= T(s); return *this; }
  Jet& operator*=(double s) { *this = scaled(*this, T(s)); return *this; }
  Jet& operator/=(double s) { *this = scaled(*this, T(1.0 / s)); return *this; }

  // value-ordering; used for pivoting and generic guards
  friend bool operator<(const Jet& a, const Jet& b) { return scalar_value(a) < scalar_value(b); }
  friend bool operator>(const Jet& a, const Jet& b) { return scalar_value(a) > scalar_value(b); }
  friend bool operator<=(const Jet& a, const Jet& b) { return scalar_value(a) <= scalar_value(b); }
  friend bool operator>=(const Jet& a, const Jet& b) { return scalar_value(a) >= scalar_value(b); }
  friend bool operator==(const Jet& a, const Jet& b) { return scalar_value(a) == scalar_value(b); }
  friend bool operator!=(const Jet& a, const Jet& b) { return scalar_value(a) != scalar_value(b); }

  /// The jet minus its constant term.
  Jet fluctuation() const {
    Jet w = *this;
    w.c_[0] = T(0);
    return w;
  }

 private:
  static Jet scaled(const Jet& a, const T& s) {
    Jet out = a;
    for (int i = 0; i < out.c_.size(); ++i) out.c_[i] = a.c_[i] * s;
    return out;
  }

  // Promote the constant operand (if any) so both share a layout.
  void align(const Jet& o) {
    if (is_constant() && !o.is_constant()) {
      Jet pro = constant(o.layout_, c_[0]);
      *this = std::move(pro);
    } else if (!is_constant() && !o.is_constant() && layout_ != o.layout_) {
      throw Error("Jet: layout mismatch");
    }
  }

  LayoutPtr layout_;  // null => constant
  Coeffs c_;
};

template <class T>
double scalar_value(const Jet<T>& j) {
  return scalar_value(j.value());
}

template <class T>
bool jet_is_zero(const Jet<T>& j) {
  for (int i = 0; i < j.coeffs().size(); ++i)
    if (!jet_is_zero(j.coeffs()[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Analytic functions via truncated series composition.
//
// f(c0 + w) = sum_k a_k w^k with w the fluctuation part; the per-function
// coefficient recurrences below produce a_k in T-arithmetic so they compose
// for nested jets as well.
// ---------------------------------------------------------------------------

inline double recip(double x) { return 1.0 / x; }

namespace detail {

template <class T, class CoefFn>
Jet<T> compose_series(const Jet<T>& x, CoefFn&& coef) {
  if (x.is_constant()) return Jet<T>(coef(0));
  const int degree = x.layout()->max_total_degree();
  const Jet<T> w = x.fluctuation();
  Jet<T> out = Jet<T>::constant(x.layout(), coef(0));
  if (jet_is_zero(w)) return out;
  Jet<T> wp = w;
  for (int k = 1; k <= degree; ++k) {
    out += Jet<T>(coef(k)) * wp;
    if (k < degree) wp = wp * w;
  }
  return out;
}

}  // namespace detail

template <class T>
Jet<T> recip(const Jet<T>& x) {
  if (scalar_value(x) == 0.0) throw Error("Jet: division by zero value");
  T r = recip(x.value());
  T ak = r;  // a_k = (-1)^k r^{k+1}
  return detail::compose_series(x, [&](int k) {
    if (k == 0) return ak;
    ak = -(ak * r);
    return ak;
  });
}

template <class T>
Jet<T> sqrt(const Jet<T>& x) {
  if (scalar_value(x) <= 0.0) throw Error("Jet: sqrt of non-positive value");
  using std::sqrt;
  T r = recip(x.value());
  T ak = sqrt(x.value());
  return detail::compose_series(x, [&](int k) {
    if (k == 0) return ak;
    ak = ak * r * ((1.5 - k) / k);
    return ak;
  });
}

template <class T>
Jet<T> exp(const Jet<T>& x) {
  using std::exp;
  T ak = exp(x.value());
  return detail::compose_series(x, [&](int k) {
    if (k == 0) return ak;
    ak = ak * (1.0 / k);
    return ak;
  });
}

template <class T>
Jet<T> log(const Jet<T>& x) {
  if (scalar_value(x) <= 0.0) throw Error("Jet: log of non-positive value");
  using std::log;
  T r = recip(x.value());
  T a0 = log(x.value());
  T ak = a0;  // becomes (-1)^{k+1} r^k / k
  return detail::compose_series(x, [&](int k) {
    if (k == 0) return a0;
    if (k == 1) {
      ak = r;
      return ak;
    }
    ak = -(ak * r) * (static_cast<double>(k - 1) / k);
    return ak;
  });
}

template <class T>
Jet<T> sin(const Jet<T>& x) {
  using std::cos;
  using std::sin;
  T table[4] = {sin(x.value()), cos(x.value()), -sin(x.value()), -cos(x.value())};
  double inv_fact = 1.0;
  return detail::compose_series(x, [&, inv_fact](int k) mutable {
    if (k > 0) inv_fact /= k;
    return table[k % 4] * inv_fact;
  });
}

template <class T>
Jet<T> cos(const Jet<T>& x) {
  using std::cos;
  using std::sin;
  T table[4] = {cos(x.value()), -sin(x.value()), -cos(x.value()), sin(x.value())};
  double inv_fact = 1.0;
  return detail::compose_series(x, [&, inv_fact](int k) mutable {
    if (k > 0) inv_fact /= k;
    return table[k % 4] * inv_fact;
  });
}

/// x^n for integer n, valid for any sign of x.
inline double ipow(double x, long n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double out = 1.0, base = x;
  while (n > 0) {
    if (n & 1) out *= base;
    base *= base;
    n >>= 1;
  }
  return out;
}

template <class T>
Jet<T> ipow(const Jet<T>& x, long n) {
  if (n < 0) return recip(ipow(x, -n));
  Jet<T> out(1.0);
  Jet<T> base = x;
  while (n > 0) {
    if (n & 1) out = out * base;
    base = base * base;
    n >>= 1;
  }
  return out;
}

/// x^p for real p; requires x > 0.
template <class T>
Jet<T> pow(const Jet<T>& x, double p) {
  const double rounded = std::round(p);
  if (rounded == p && std::abs(p) <= 64) return ipow(x, static_cast<long>(p));
  if (scalar_value(x) <= 0.0) throw Error("Jet: pow of non-positive base");
  using std::pow;
  T r = recip(x.value());
  T ak = pow(x.value(), p);
  return detail::compose_series(x, [&](int k) {
    if (k == 0) return ak;
    ak = ak * r * ((p - k + 1) / k);
    return ak;
  });
}

template <class T>
Jet<T> pow(const Jet<T>& x, const Jet<T>& p) {
  if (p.is_constant() || jet_is_zero(p.fluctuation()))
    return pow(x, scalar_value(p));
  return exp(p * log(x));
}

template <class T>
Jet<T> abs(const Jet<T>& x) {
  return scalar_value(x) < 0.0 ? -x : x;
}

using JetD = Jet<double>;

}  // namespace finsler

// Minimal Eigen scalar-traits so Eigen::Matrix<Jet, ...> can be used as a
// container for jet-valued tensors.
namespace Eigen {
template <class T>
struct NumTraits<finsler::Jet<T>> : NumTraits<double> {
  using Real = finsler::Jet<T>;
  using NonInteger = finsler::Jet<T>;
  using Nested = finsler::Jet<T>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 16,
    MulCost = 64,
  };
};
}  // namespace Eigen
