#pragma once

// Deterministic sampling of chart points and fiber points.  Draws come from
// std::mt19937_64 with an explicit bit-to-double mapping so identical seeds
// give identical samples on every platform.

#include <cstdint>
#include <random>

#include "finsler/types.hpp"

namespace finsler {

class SampleRng {
 public:
  explicit SampleRng(uint64_t seed) : gen_(seed) {}

  double canonical() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  /// Point inside the fundamental cell of a periodic axis, or [-1, 1] on an
  /// open axis.
  Vec chart_point(const ChartDomain& domain) {
    Vec x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i)
      x[i] = domain.period(i) ? uniform(0.0, *domain.period(i)) : uniform(-1.0, 1.0);
    return x;
  }

  /// Nonzero tangent vector with components in [-1, 1], kept away from the
  /// puncture, then scaled into [0.5, 2].
  Vec tangent(int dim) {
    Vec y(dim);
    do {
      for (int i = 0; i < dim; ++i) y[i] = uniform(-1.0, 1.0);
    } while (y.norm() < 0.2);
    y *= uniform(0.5, 2.0) / y.norm();
    return y;
  }

  FiberPoint fiber_point(const ChartDomain& domain) {
    return FiberPoint(chart_point(domain), tangent(domain.dim()));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace finsler
