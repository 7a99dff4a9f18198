#pragma once

// Test-only finite-difference oracles, kept independent of the jet engine.
// Central differences with one Richardson extrapolation, relative step 1e-5.

#include <cmath>
#include <functional>

#include "finsler/types.hpp"

namespace finsler::testing {

inline double fd_step(double scale) { return 1e-5 * std::max(1.0, std::abs(scale)); }

/// d/dt f(t) at t0, central difference + one Richardson pass.
template <class F>
double fd_derivative(F&& f, double t0, double h) {
  auto central = [&](double step) { return (f(t0 + step) - f(t0 - step)) / (2.0 * step); };
  const double d_h = central(h);
  const double d_h2 = central(h / 2.0);
  return (4.0 * d_h2 - d_h) / 3.0;
}

/// d^2/dt^2 f(t) at t0, central difference + one Richardson pass.
template <class F>
double fd_second_derivative(F&& f, double t0, double h) {
  auto central = [&](double step) {
    return (f(t0 + step) - 2.0 * f(t0) + f(t0 - step)) / (step * step);
  };
  const double d_h = central(h);
  const double d_h2 = central(h / 2.0);
  return (4.0 * d_h2 - d_h) / 3.0;
}

/// Partial derivative of f : R^n -> R in coordinate `i`.
inline double fd_partial(const std::function<double(const Vec&)>& f, const Vec& v, int i,
                         double h = 0.0) {
  const double step = h > 0.0 ? h : fd_step(v.norm());
  return fd_derivative(
      [&](double t) {
        Vec w = v;
        w[i] = t;
        return f(w);
      },
      v[i], step);
}

/// Mixed second partial of f : R^n -> R.
inline double fd_partial2(const std::function<double(const Vec&)>& f, const Vec& v, int i, int j,
                          double h = 0.0) {
  const double step = h > 0.0 ? h : fd_step(v.norm());
  if (i == j) {
    return fd_second_derivative(
        [&](double t) {
          Vec w = v;
          w[i] = t;
          return f(w);
        },
        v[i], step);
  }
  return fd_derivative(
      [&](double t) {
        Vec w = v;
        w[i] = t;
        return fd_partial([&](const Vec& u) { return f(u); }, w, j, step);
      },
      v[i], step);
}

}  // namespace finsler::testing
