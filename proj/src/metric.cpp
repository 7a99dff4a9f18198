#include "finsler/metric.hpp"

#include <limits>
#include <sstream>

#include "finsler/sampling.hpp"

namespace finsler {

namespace {

std::string describe(const FiberPoint& p) {
  std::ostringstream os;
  os << "x = [";
  for (int i = 0; i < p.dim(); ++i) os << (i ? ", " : "") << p.x[i];
  os << "], y = [";
  for (int i = 0; i < p.dim(); ++i) os << (i ? ", " : "") << p.y[i];
  os << "]";
  return os.str();
}

}  // namespace

ValidationReport validate_metric(const MetricSpec& m, const ChartDomain& domain,
                                 int sample_count, uint64_t seed) {
  if (sample_count < 1) throw Error("validate_metric: sample_count must be >= 1");
  if (m.dim() != domain.dim()) throw Error("validate_metric: dimension mismatch");

  SampleRng rng(seed);
  ValidationReport rep;
  rep.samples = sample_count;
  rep.min_norm = std::numeric_limits<double>::infinity();
  rep.min_g_eigenvalue = std::numeric_limits<double>::infinity();

  static constexpr double kLambdas[] = {0.5, 2.0, 7.0};

  for (int s = 0; s < sample_count; ++s) {
    const FiberPoint p = rng.fiber_point(domain);
    const double f = m.norm<double>(p.x, p.y);
    if (!std::isfinite(f) || f <= 0.0) {
      ++rep.positivity_failures;
      if (rep.worst_location.empty()) rep.worst_location = "F <= 0 at " + describe(p);
      continue;
    }
    rep.min_norm = std::min(rep.min_norm, f);

    for (const double lambda : kLambdas) {
      const double scaled = m.norm<double>(p.x, Vec(lambda * p.y));
      const double rel = std::abs(scaled - lambda * f) / (lambda * f);
      if (rel > rep.worst_homogeneity) {
        rep.worst_homogeneity = rel;
        rep.worst_location = "homogeneity at " + describe(p);
      }
    }

    try {
      const FundamentalTensor ft = fundamental_tensor(m, p);
      Eigen::SelfAdjointEigenSolver<Mat> eig(ft.g);
      rep.min_g_eigenvalue = std::min(rep.min_g_eigenvalue, eig.eigenvalues().minCoeff());
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        ++rep.definiteness_failures;
      } else {
        const double euler = std::abs(p.y.dot(ft.g * p.y) - f * f) / (f * f);
        rep.worst_euler = std::max(rep.worst_euler, euler);
      }
    } catch (const Error&) {
      ++rep.definiteness_failures;
      if (rep.worst_location.empty())
        rep.worst_location = "fundamental tensor failed at " + describe(p);
    }
  }
  return rep;
}

}  // namespace finsler
