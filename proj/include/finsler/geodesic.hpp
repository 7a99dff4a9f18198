#pragma once

// Geodesic integration and one-parameter flows of base vector fields.
// Fixed-step classical RK4 throughout; step counts come from the scenario so
// convergence tables are deterministic.

#include <utility>
#include <vector>

#include "finsler/spray.hpp"

namespace finsler {

struct TrajectorySample {
  double t;
  Vec x;  // unwrapped chart coordinates
  Vec y;
};

/// Worst residual of the geodesic equation along a sampled curve, with the
/// acceleration reconstructed by a fourth-order stencil on the velocities.
inline double max_geodesic_residual(const MetricSpec& m, const std::vector<Vec>& xs,
                                    const std::vector<Vec>& ys, double h) {
  if (xs.size() < 5) throw Error("max_geodesic_residual: need at least 5 samples");
  double worst = 0.0;
  for (size_t k = 2; k + 2 < xs.size(); ++k) {
    const Vec accel = (-ys[k + 2] + 8.0 * ys[k + 1] - 8.0 * ys[k - 1] + ys[k - 2]) / (12.0 * h);
    const Vec G = spray_coefficients(m, FiberPoint(xs[k], ys[k]));
    worst = std::max(worst, (accel + 2.0 * G).norm());
  }
  return worst;
}

struct GeodesicTrajectory {
  std::vector<TrajectorySample> samples;
  double step = 0.0;

  const TrajectorySample& back() const { return samples.back(); }

  /// Largest relative drift of F along the trajectory.
  double norm_drift(const MetricSpec& m) const {
    const double f0 = eval_norm(m, FiberPoint(samples.front().x, samples.front().y));
    double worst = 0.0;
    for (const auto& s : samples)
      worst = std::max(worst, std::abs(eval_norm(m, FiberPoint(s.x, s.y)) - f0));
    return worst / f0;
  }

  /// Worst residual of the geodesic equation at interior samples.
  double max_equation_residual(const MetricSpec& m) const {
    std::vector<Vec> xs, ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& s : samples) {
      xs.push_back(s.x);
      ys.push_back(s.y);
    }
    return max_geodesic_residual(m, xs, ys, step);
  }
};

namespace detail {

template <class Rhs>
Vec rk4_step(const Rhs& rhs, const Vec& z, double h) {
  const Vec k1 = rhs(z);
  const Vec k2 = rhs(Vec(z + 0.5 * h * k1));
  const Vec k3 = rhs(Vec(z + 0.5 * h * k2));
  const Vec k4 = rhs(Vec(z + h * k3));
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

[[noreturn]] inline void left_chart(const char* what) {
  throw LeftChart(std::string("integration left the chart: ") + what);
}

}  // namespace detail

/// Integrates the geodesic equation x'' + 2G(x, x') = 0 from p0 over
/// [0, t_end] with `steps` RK4 steps.  Metric evaluation failures and
/// non-finite states surface as LeftChart.
inline GeodesicTrajectory integrate_geodesic(const MetricSpec& m, const FiberPoint& p0,
                                             double t_end, int steps) {
  if (steps < 1) throw Error("integrate_geodesic: steps must be >= 1");
  const int n = m.dim();
  auto rhs = [&](const Vec& z) {
    const Vec x = z.head(n), y = z.tail(n);
    if (!z.allFinite()) detail::left_chart("non-finite state");
    try {
      const Vec G = spray_coefficients(m, FiberPoint(x, y));
      Vec dz(2 * n);
      dz << y, -2.0 * G;
      return dz;
    } catch (const LeftChart&) {
      throw;
    } catch (const Error& e) {
      detail::left_chart(e.what());
    }
  };

  GeodesicTrajectory traj;
  traj.step = t_end / steps;
  traj.samples.reserve(steps + 1);
  Vec z(2 * n);
  z << p0.x, p0.y;
  traj.samples.push_back({0.0, p0.x, p0.y});
  for (int k = 1; k <= steps; ++k) {
    z = detail::rk4_step(rhs, z, traj.step);
    if (!z.allFinite()) detail::left_chart("non-finite state");
    traj.samples.push_back({k * traj.step, z.head(n), z.tail(n)});
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Flows of base vector fields
// ---------------------------------------------------------------------------

/// One-parameter flow of a base vector field for a fixed time.
struct FlowMap {
  VectorFieldDef generator;
  double t = 0.0;
  int steps = 256;
};

/// phi_t(x); the result is reduced into the fundamental cell on periodic axes.
inline Vec flow_point(const FlowMap& flow, const ChartDomain& domain, const Vec& x0) {
  Vec z = x0;
  if (flow.steps < 1) throw Error("flow_point: steps must be >= 1");
  const double h = flow.t / flow.steps;
  auto rhs = [&](const Vec& x) { return flow.generator.eval_d(x); };
  for (int k = 0; k < flow.steps; ++k) {
    z = detail::rk4_step(rhs, z, h);
    if (!z.allFinite()) detail::left_chart("flow diverged");
  }
  return domain.wrap(z);
}

/// phi_t(x) together with its differential D phi_t(x), obtained by
/// integrating the variational equation D' = J_V(x(t)) D alongside the flow.
inline std::pair<Vec, Mat> flow_with_differential(const FlowMap& flow, const ChartDomain& domain,
                                                  const Vec& x0) {
  const int n = static_cast<int>(x0.size());
  auto Lx = jet_layout({{n, 1}});
  auto rhs = [&](const Vec& z) {
    const Vec x = z.head(n);
    VecX<JetD> xh(n);
    for (int i = 0; i < n; ++i) xh[i] = JetD::variable(Lx, i, x[i]);
    const VecX<JetD> v = flow.generator(xh);
    Mat J(n, n);
    Vec val(n);
    for (int i = 0; i < n; ++i) {
      val[i] = v[i].value();
      for (int j = 0; j < n; ++j) J(i, j) = v[i].partial(j);
    }
    Mat D(n, n);
    for (int c = 0; c < n; ++c) D.col(c) = z.segment(n + c * n, n);
    const Mat dD = J * D;
    Vec dz(n + n * n);
    dz.head(n) = val;
    for (int c = 0; c < n; ++c) dz.segment(n + c * n, n) = dD.col(c);
    return dz;
  };

  Vec z(n + n * n);
  z.head(n) = x0;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) z[n + c * n + r] = (r == c) ? 1.0 : 0.0;
  const double h = flow.t / flow.steps;
  for (int k = 0; k < flow.steps; ++k) {
    z = detail::rk4_step(rhs, z, h);
    if (!z.allFinite()) detail::left_chart("flow diverged");
  }
  Mat D(n, n);
  for (int c = 0; c < n; ++c) D.col(c) = z.segment(n + c * n, n);
  return {domain.wrap(z.head(n)), D};
}

/// The lifted flow phi-hat(x, y) = (phi(x), D phi(x) y).
inline FiberPoint lifted_flow(const FlowMap& flow, const ChartDomain& domain,
                              const FiberPoint& p) {
  auto [x1, D] = flow_with_differential(flow, domain, p.x);
  return FiberPoint(x1, Vec(D * p.y));
}

/// Integrates the geodesic from p, pushes it through the lifted flow, and
/// returns the worst residual of the geodesic equation along the image
/// curve; approximately zero iff phi_t is affine along this geodesic.
inline double affine_transformation_defect(const MetricSpec& m, const FlowMap& flow,
                                           const ChartDomain& domain, const FiberPoint& p,
                                           double t_end, int geo_steps = 512) {
  const GeodesicTrajectory traj = integrate_geodesic(m, p, t_end, geo_steps);
  const int count = static_cast<int>(traj.samples.size());
  std::vector<Vec> xs(count), ys(count);
  for (int k = 0; k < count; ++k) {
    const FiberPoint image = lifted_flow(flow, domain, FiberPoint(traj.samples[k].x, traj.samples[k].y));
    xs[k] = image.x;
    ys[k] = image.y;
  }
  // d/dt of the image curve is exactly D phi * gamma' (chain rule), so only
  // the second derivative needs differencing; fourth-order stencil so the
  // differencing floor sits well below the integrator error.
  if (count < 5) throw Error("affine_transformation_defect: need at least 4 geodesic steps");
  return max_geodesic_residual(m, xs, ys, traj.step);
}

}  // namespace finsler
