#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace finsler {

template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecX<double>;
using Mat = MatX<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tangent vector y = 0 handed to an operation that requires y in TM \ {0}.
struct ZeroVector : Error {
  using Error::Error;
};

/// F evaluated to a non-positive value on a nonzero tangent vector.
struct NonPositiveNorm : Error {
  using Error::Error;
};

/// Fundamental tensor failed its positive-definiteness factorization.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

/// An integrated curve crossed the boundary of a non-periodic chart
/// (detected as a metric evaluation failure or a non-finite state).
struct LeftChart : Error {
  using Error::Error;
};

/// |density of the contact volume form| fell below the degeneracy floor.
struct DegenerateDensity : Error {
  using Error::Error;
};

/// The bracket [G, V-hat] acquired a horizontal component above tolerance;
/// indicates a differentiation bug, not a geometric fact.
struct HorizontalLeak : Error {
  using Error::Error;
};

/// Scenario configuration failed to parse or validate.
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Chart domain
// ---------------------------------------------------------------------------

/// A single coordinate chart, optionally with per-axis periodic
/// identification.  All periods set => torus; none set => open chart.
class ChartDomain {
 public:
  explicit ChartDomain(int dim) : dim_(dim), periods_(dim) {
    if (dim < 2) throw Error("ChartDomain: dim must be >= 2");
  }

  static ChartDomain open_chart(int dim) { return ChartDomain(dim); }

  static ChartDomain torus(const Vec& periods) {
    ChartDomain d(static_cast<int>(periods.size()));
    for (int i = 0; i < d.dim_; ++i) d.set_period(i, periods[i]);
    return d;
  }

  int dim() const { return dim_; }

  void set_period(int axis, double period) {
    if (period <= 0.0) throw Error("ChartDomain: period must be positive");
    periods_.at(axis) = period;
  }

  const std::optional<double>& period(int axis) const { return periods_.at(axis); }

  bool is_torus() const {
    for (const auto& p : periods_)
      if (!p) return false;
    return true;
  }

  bool has_any_period() const {
    for (const auto& p : periods_)
      if (p) return true;
    return false;
  }

  /// Reduce x into the fundamental cell [0, period) on each periodic axis.
  Vec wrap(Vec x) const {
    for (int i = 0; i < dim_; ++i) {
      if (periods_[i]) {
        const double p = *periods_[i];
        x[i] -= p * std::floor(x[i] / p);
      }
    }
    return x;
  }

  /// Shortest signed displacement from a to b respecting periodicity.
  Vec displacement(const Vec& a, const Vec& b) const {
    Vec d = b - a;
    for (int i = 0; i < dim_; ++i) {
      if (periods_[i]) {
        const double p = *periods_[i];
        d[i] -= p * std::round(d[i] / p);
      }
    }
    return d;
  }

 private:
  int dim_;
  std::vector<std::optional<double>> periods_;
};

// ---------------------------------------------------------------------------
// Fiber point
// ---------------------------------------------------------------------------

/// A base point with a nonzero tangent vector: an element of TM \ {0}.
struct FiberPoint {
  Vec x;
  Vec y;

  FiberPoint(Vec x_in, Vec y_in) : x(std::move(x_in)), y(std::move(y_in)) {
    if (x.size() != y.size()) throw Error("FiberPoint: x and y dimension mismatch");
    if (y.norm() == 0.0) throw ZeroVector("FiberPoint: tangent vector must be nonzero");
  }

  int dim() const { return static_cast<int>(x.size()); }

  FiberPoint scaled(double lambda) const { return FiberPoint(x, Vec(lambda * y)); }
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules
// ---------------------------------------------------------------------------

inline double sq(double v) { return v * v; }

/// Deterministic pairwise reduction; independent of chunking/thread count.
inline double pairwise_sum(const double* data, std::ptrdiff_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::ptrdiff_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), static_cast<std::ptrdiff_t>(v.size()));
}

}  // namespace finsler
