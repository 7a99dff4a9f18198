#include "finsler/scenario.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "finsler/affine.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/sampling.hpp"
#include "finsler/sphere_bundle.hpp"
#include "finsler/spray.hpp"

namespace finsler {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

const ordered_json& require_key(const ordered_json& j, const std::string& key,
                                const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(where, "missing key '" + key + "'");
  return *it;
}

template <class T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

std::vector<Expression> parse_expressions(const ordered_json& arr, int dim,
                                          const std::string& where) {
  if (!arr.is_array()) config_fail(where, "expected an array of expressions");
  std::vector<Expression> out;
  for (const auto& e : arr) {
    if (e.is_number()) {
      out.push_back(Expression::parse(ordered_json(e).dump(), dim));
    } else if (e.is_string()) {
      out.push_back(Expression::parse(e.get<std::string>(), dim));
    } else {
      config_fail(where, "expressions must be strings or numbers");
    }
  }
  return out;
}

std::vector<Expression> parse_matrix(const ordered_json& rows, int dim,
                                     const std::string& where) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
    config_fail(where, "expected " + std::to_string(dim) + " rows");
  std::vector<Expression> flat;
  for (const auto& row : rows) {
    auto parsed = parse_expressions(row, dim, where);
    if (static_cast<int>(parsed.size()) != dim)
      config_fail(where, "expected " + std::to_string(dim) + " entries per row");
    for (auto& e : parsed) flat.push_back(std::move(e));
  }
  return flat;
}

MetricSpec parse_metric(const ordered_json& j, int dim) {
  const std::string family = require_key(j, "family", "metric").get<std::string>();
  if (family == "euclidean") {
    Mat A = Mat::Identity(dim, dim);
    if (j.contains("A")) {
      const auto& rows = j["A"];
      if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
        config_fail("metric.A", "expected a " + std::to_string(dim) + "-row matrix");
      for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) A(i, k) = rows[i][k].get<double>();
    }
    return MetricSpec::euclidean(A);
  }
  if (family == "riemannian")
    return MetricSpec::riemannian(dim, parse_matrix(require_key(j, "a", "metric"), dim, "metric.a"));
  if (family == "randers")
    return MetricSpec::randers(dim, parse_matrix(require_key(j, "a", "metric"), dim, "metric.a"),
                               parse_expressions(require_key(j, "b", "metric"), dim, "metric.b"));
  if (family == "custom")
    return MetricSpec::custom(
        dim, Expression::parse(require_key(j, "F", "metric").get<std::string>(), dim));
  config_fail("metric.family", "unknown family '" + family + "'");
}

FiberPoint parse_fiber_point(const ordered_json& j, int dim, const std::string& where) {
  const auto& xa = require_key(j, "x", where);
  const auto& ya = require_key(j, "y", where);
  if (static_cast<int>(xa.size()) != dim || static_cast<int>(ya.size()) != dim)
    config_fail(where, "x and y must have length " + std::to_string(dim));
  Vec x(dim), y(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = xa[i].get<double>();
    y[i] = ya[i].get<double>();
  }
  return FiberPoint(x, y);
}

int grid_resolution(const ordered_json& p, const std::string& where) {
  const int r = get_or<int>(p, "resolution", 0);
  if (r < 8) config_fail(where, "resolution must be >= 8");
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

Scenario Scenario::from_json(const ordered_json& j) {
  Scenario s;
  const auto& dj = require_key(j, "domain", "config");
  const int dim = require_key(dj, "dim", "domain").get<int>();
  if (dim < 2) config_fail("domain.dim", "dimension must be >= 2");
  s.domain = ChartDomain(dim);
  if (dj.contains("periods")) {
    const auto& periods = dj["periods"];
    if (static_cast<int>(periods.size()) != dim)
      config_fail("domain.periods", "expected one entry per axis");
    for (int i = 0; i < dim; ++i)
      if (!periods[i].is_null()) s.domain.set_period(i, periods[i].get<double>());
  }

  s.metric = parse_metric(require_key(j, "metric", "config"), dim);
  s.seed = get_or<uint64_t>(j, "seed", 0);

  if (j.contains("fields")) {
    for (const auto& [name, comps] : j["fields"].items()) {
      auto parsed = parse_expressions(comps, dim, "fields." + name);
      if (static_cast<int>(parsed.size()) != dim)
        config_fail("fields." + name, "expected " + std::to_string(dim) + " components");
      VectorFieldDef field(std::move(parsed));
      // fields on periodic axes must be compatible with the identification
      SampleRng probe(0x9e3779b97f4a7c15ull);
      for (int trial = 0; trial < 5; ++trial) {
        const Vec x = probe.chart_point(s.domain);
        const Vec v = field.eval_d(x);
        for (int axis = 0; axis < dim; ++axis) {
          if (!s.domain.period(axis)) continue;
          Vec shifted = x;
          shifted[axis] += *s.domain.period(axis);
          if ((field.eval_d(shifted) - v).norm() > 1e-9 * std::max(1.0, v.norm()))
            config_fail("fields." + name,
                        "not periodic along axis " + std::to_string(axis + 1));
        }
      }
      s.fields.emplace(name, std::move(field));
    }
  }

  const auto& checks = require_key(j, "checks", "config");
  if (!checks.is_array() || checks.empty()) config_fail("checks", "expected a non-empty array");
  bool randomized = false;
  for (size_t i = 0; i < checks.size(); ++i) {
    const auto& cj = checks[i];
    const std::string where = "checks[" + std::to_string(i) + "]";
    CheckSpec spec;
    spec.name = require_key(cj, "name", where).get<std::string>();
    spec.type = require_key(cj, "type", where).get<std::string>();
    spec.params = cj;
    for (const auto& existing : s.checks)
      if (existing.name == spec.name) config_fail(where, "duplicate check name '" + spec.name + "'");
    static const char* known[] = {"validate",    "curvature-oracle", "affine",
                                  "parallel",    "stokes",           "total-ricci",
                                  "global-norm", "reversibility",    "convergence"};
    bool ok = false;
    for (const char* k : known) ok = ok || spec.type == k;
    if (!ok) config_fail(where, "unknown check type '" + spec.type + "'");
    if (spec.type == "validate" || spec.type == "curvature-oracle" || spec.type == "affine" ||
        spec.type == "parallel")
      randomized = true;
    if (cj.contains("field")) {
      const std::string f = cj["field"].get<std::string>();
      if (s.fields.find(f) == s.fields.end())
        config_fail(where + ".field", "unknown field '" + f + "'");
    }
    s.checks.push_back(std::move(spec));
  }
  if (randomized && !j.contains("seed"))
    config_fail("seed", "a seed is required when any check uses random sampling");
  return s;
}

Scenario Scenario::load(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error in ") + config_path + ": " + e.what());
  }
  return from_json(j);
}

const VectorFieldDef& Scenario::field(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end()) throw ConfigError("unknown field '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Individual checks
// ---------------------------------------------------------------------------

namespace {

struct GridGate {
  double omega_xi_tol;
  double domega_xi_tol;
};

// every quadrature check verifies the contact identities at all nodes
bool gate_grid(const SMGrid& grid, const ordered_json& p, ordered_json& results) {
  const GridGate gate{get_or<double>(p, "omega_xi_tolerance", 1e-9),
                      get_or<double>(p, "domega_xi_tolerance", 1e-8)};
  results["grid_sign"] = grid.sign;
  results["worst_omega_xi_deviation"] = grid.worst_omega_xi_dev;
  results["worst_domega_xi"] = grid.worst_domega_xi;
  return grid.worst_omega_xi_dev < gate.omega_xi_tol && grid.worst_domega_xi < gate.domega_xi_tol;
}

uint64_t check_seed(const Scenario& s, const ordered_json& p) {
  return get_or<uint64_t>(p, "seed", s.seed);
}

CheckResult run_validate(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const int samples = get_or<int>(p, "samples", 64);
  const double tol = get_or<double>(p, "tolerance", 1e-9);
  const auto rep = validate_metric(s.metric, s.domain, samples, check_seed(s, p));
  r.results["worst_homogeneity"] = rep.worst_homogeneity;
  r.results["worst_euler"] = rep.worst_euler;
  r.results["min_norm"] = rep.min_norm;
  r.results["min_g_eigenvalue"] = rep.min_g_eigenvalue;
  r.results["positivity_failures"] = rep.positivity_failures;
  r.results["definiteness_failures"] = rep.definiteness_failures;
  if (!rep.worst_location.empty()) r.results["worst_location"] = rep.worst_location;
  const bool expect_valid = get_or<bool>(p, "expect_valid", true);
  r.passed = expect_valid ? rep.passed(tol) : !rep.passed(tol);
  return r;
}

CheckResult run_curvature_oracle(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const int samples = get_or<int>(p, "samples", 64);
  const double tol = get_or<double>(p, "tolerance", 1e-6);
  const double c = get_or<double>(p, "constant_curvature", 0.0);
  SampleRng rng(check_seed(s, p));
  double worst = 0.0;
  std::string worst_at;
  for (int i = 0; i < samples; ++i) {
    const FiberPoint q = rng.fiber_point(s.domain);
    const auto b = curvature_bundle(s.metric, q);
    const double F2 = b.F * b.F;
    const Vec y_flat = b.g * q.y;
    const Mat expected = c * (F2 * Mat::Identity(q.dim(), q.dim()) - q.y * y_flat.transpose());
    const double dev = (b.R - expected).norm() / F2;
    if (dev > worst) {
      worst = dev;
      std::ostringstream os;
      os << "sample " << i;
      worst_at = os.str();
    }
  }
  r.results["worst_relative_deviation"] = worst;
  r.results["worst_location"] = worst_at;
  r.passed = worst < tol;
  return r;
}

CheckResult run_affine(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const auto& V = s.field(require_key(p, "field", spec.name).get<std::string>());
  const int samples = get_or<int>(p, "samples", 256);
  const double tol = get_or<double>(p, "tolerance", 1e-7);

  const auto summary = affine_sample_summary(s.metric, s.domain, V, samples, check_seed(s, p));
  r.results["max_jacobi_bracket_gap"] = summary.max_jacobi_bracket_gap;
  r.results["max_jacobi_residual"] = summary.max_jacobi;
  r.results["worst_parallel_residual"] = summary.worst_parallel;
  r.passed = summary.max_jacobi_bracket_gap < tol;

  if (p.contains("affine_max")) r.passed = r.passed && summary.max_jacobi < p["affine_max"].get<double>();
  if (p.contains("jacobi_min")) r.passed = r.passed && summary.max_jacobi > p["jacobi_min"].get<double>();

  if (p.contains("flow")) {
    const auto& fj = p["flow"];
    const double t = get_or<double>(fj, "t", 1.0);
    const int flow_steps = get_or<int>(fj, "steps", 256);
    const int geo_steps = get_or<int>(fj, "geodesic_steps", 512);
    const FiberPoint p0 = fj.contains("p0")
                              ? parse_fiber_point(fj["p0"], s.domain.dim(), spec.name + ".flow.p0")
                              : SampleRng(check_seed(s, p)).fiber_point(s.domain);
    const double defect = affine_transformation_defect(s.metric, {V, t, flow_steps}, s.domain,
                                                       p0, get_or<double>(fj, "t_geodesic", 1.0),
                                                       geo_steps);
    r.results["flow_defect"] = defect;
    if (fj.contains("defect_max")) r.passed = r.passed && defect < fj["defect_max"].get<double>();
    if (fj.contains("defect_min")) r.passed = r.passed && defect > fj["defect_min"].get<double>();
  }
  return r;
}

CheckResult run_parallel(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const auto& V = s.field(require_key(p, "field", spec.name).get<std::string>());
  const int samples = get_or<int>(p, "samples", 64);
  SampleRng rng(check_seed(s, p));
  std::vector<FiberPoint> pts;
  pts.reserve(samples);
  for (int i = 0; i < samples; ++i) pts.push_back(rng.fiber_point(s.domain));
  const double residual = parallel_residual(s.metric, V, pts);
  r.results["parallel_residual"] = residual;
  r.passed = true;
  if (p.contains("residual_max")) r.passed = r.passed && residual < p["residual_max"].get<double>();
  if (p.contains("residual_min")) r.passed = r.passed && residual > p["residual_min"].get<double>();

  if (p.contains("resolution")) {
    const int res = grid_resolution(p, spec.name);
    const auto grid = build_sm_grid(s.metric, s.domain, {res, res, res},
                                    get_or<double>(p, "theta_offset", 0.0));
    const double energy = parallel_energy(s.metric, grid, V);
    r.results["parallel_energy"] = energy;
    r.passed = gate_grid(grid, p, r.results) && r.passed;
    if (p.contains("energy_max")) r.passed = r.passed && energy < p["energy_max"].get<double>();
  }
  return r;
}

CheckResult run_stokes(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const Expression f =
      Expression::parse(require_key(p, "f", spec.name).get<std::string>(), s.domain.dim());
  const int res = grid_resolution(p, spec.name);
  const double tol = get_or<double>(p, "tolerance", 1e-8);
  const auto grid = build_sm_grid(s.metric, s.domain, {res, res, res},
                                  get_or<double>(p, "theta_offset", 0.0));
  const double value = verify_stokes_lemma(s.metric, grid, f);
  r.results["integral_abs"] = value;
  r.passed = gate_grid(grid, p, r.results) && value < tol;
  if (get_or<bool>(p, "check_decreasing", false)) {
    const int half = res / 2;
    if (half < 8) config_fail(spec.name, "resolution too small for check_decreasing");
    const auto coarse = build_sm_grid(s.metric, s.domain, {half, half, half},
                                      get_or<double>(p, "theta_offset", 0.0));
    const double coarse_value = verify_stokes_lemma(s.metric, coarse, f);
    r.results["integral_abs_half_resolution"] = coarse_value;
    r.passed = r.passed && value <= coarse_value;
  }
  return r;
}

CheckResult run_total_ricci(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const auto& V = s.field(require_key(p, "field", spec.name).get<std::string>());
  const int res = grid_resolution(p, spec.name);
  const auto grid = build_sm_grid(s.metric, s.domain, {res, res, res},
                                  get_or<double>(p, "theta_offset", 0.0));
  const double value = total_ricci(s.metric, grid, V);
  r.results["total_ricci"] = value;
  r.passed = gate_grid(grid, p, r.results);
  if (p.contains("max_abs")) r.passed = r.passed && std::abs(value) < p["max_abs"].get<double>();
  if (get_or<bool>(p, "expect_nonpositive", false)) r.passed = r.passed && value <= 0.0;
  if (p.contains("self_convergence")) {
    const auto& sc = p["self_convergence"];
    const int res2 = res * get_or<int>(sc, "factor", 2);
    const auto fine = build_sm_grid(s.metric, s.domain, {res2, res2, res2},
                                    get_or<double>(p, "theta_offset", 0.0));
    const double value2 = total_ricci(s.metric, fine, V);
    r.results["total_ricci_refined"] = value2;
    r.passed = r.passed && std::abs(value2 - value) <
                               get_or<double>(sc, "tolerance", 1e-6) *
                                   std::max(1.0, std::abs(value2));
  }
  return r;
}

CheckResult run_global_norm(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const auto& V = s.field(require_key(p, "field", spec.name).get<std::string>());
  const int res = grid_resolution(p, spec.name);
  const auto grid = build_sm_grid(s.metric, s.domain, {res, res, res},
                                  get_or<double>(p, "theta_offset", 0.0));
  const double value = global_norm(s.metric, grid, V);
  r.results["global_norm"] = value;
  r.passed = gate_grid(grid, p, r.results) && value >= 0.0;
  if (p.contains("expected")) {
    const double expected = p["expected"].get<double>();
    const double rel_tol = get_or<double>(p, "rel_tolerance", 1e-9);
    r.results["expected"] = expected;
    r.passed = r.passed && std::abs(value - expected) <= rel_tol * std::max(1.0, std::abs(expected));
  }
  return r;
}

CheckResult run_reversibility(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const int res = get_or<int>(p, "resolution", 1024);
  const int chart_res = get_or<int>(p, "chart_resolution", 16);
  const double lambda = reversibility(s.metric, s.domain, res, chart_res);
  r.results["lambda"] = lambda;
  r.passed = lambda >= 1.0;
  if (p.contains("expected")) {
    const double expected = p["expected"].get<double>();
    const double rel_tol = get_or<double>(p, "rel_tolerance", 1e-6);
    r.results["expected"] = expected;
    r.passed = r.passed && std::abs(lambda - expected) <= rel_tol * expected;
  }
  return r;
}

double quadrature_target_value(const Scenario& s, const std::string& target,
                               const ordered_json& p, int res) {
  const auto grid = build_sm_grid(s.metric, s.domain, {res, res, res},
                                  get_or<double>(p, "theta_offset", 0.0));
  if (target == "volume") return integrate_sm(grid, [](const FiberPoint&) { return 1.0; });
  if (target == "stokes") {
    const Expression f =
        Expression::parse(require_key(p, "f", "convergence").get<std::string>(), s.domain.dim());
    return verify_stokes_lemma(s.metric, grid, f);
  }
  if (target == "total-ricci")
    return total_ricci(s.metric, grid, s.field(require_key(p, "field", "convergence").get<std::string>()));
  if (target == "global-norm")
    return global_norm(s.metric, grid, s.field(require_key(p, "field", "convergence").get<std::string>()));
  config_fail("convergence.target", "unknown target '" + target + "'");
}

std::vector<ConvergenceRow> convergence_rows(const Scenario& s, const ordered_json& p,
                                             const std::vector<int>& resolutions) {
  const std::string target = require_key(p, "target", "convergence").get<std::string>();
  std::vector<ConvergenceRow> rows;

  if (target == "geodesic-order") {
    const FiberPoint p0 = parse_fiber_point(require_key(p, "p0", "convergence"), s.domain.dim(),
                                            "convergence.p0");
    const double t_end = get_or<double>(p, "t_end", 1.0);
    std::vector<Vec> endpoints;
    for (int steps : resolutions)
      endpoints.push_back(integrate_geodesic(s.metric, p0, t_end, steps).back().x);
    for (size_t i = 0; i < endpoints.size(); ++i) {
      ConvergenceRow row;
      row.resolution = resolutions[i];
      row.value = endpoints[i].norm();
      row.self_difference = i == 0 ? 0.0 : (endpoints[i] - endpoints[i - 1]).norm();
      row.observed_order =
          i < 2 ? 0.0 : std::log2(rows[i - 1].self_difference / row.self_difference);
      rows.push_back(row);
    }
    return rows;
  }

  for (size_t i = 0; i < resolutions.size(); ++i) {
    ConvergenceRow row;
    row.resolution = resolutions[i];
    row.value = quadrature_target_value(s, target, p, resolutions[i]);
    row.self_difference = i == 0 ? 0.0 : std::abs(row.value - rows[i - 1].value);
    row.observed_order =
        i < 2 || row.self_difference == 0.0
            ? 0.0
            : std::log2(rows[i - 1].self_difference / row.self_difference) /
                  std::log2(static_cast<double>(resolutions[i]) / resolutions[i - 1]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<int> check_resolutions(const ordered_json& p, const std::string& where) {
  std::vector<int> out;
  if (p.contains("resolutions")) {
    for (const auto& v : p["resolutions"]) out.push_back(v.get<int>());
  } else {
    const int base = get_or<int>(p, "resolution", 0);
    if (base <= 0) config_fail(where, "need 'resolutions' or 'resolution' with 'factors'");
    for (const auto& f : require_key(p, "factors", where)) out.push_back(base * f.get<int>());
  }
  if (out.size() < 2) config_fail(where, "need at least two resolutions");
  return out;
}

CheckResult run_convergence(const Scenario& s, const CheckSpec& spec) {
  CheckResult r;
  const auto& p = spec.params;
  const auto rows = convergence_rows(s, p, check_resolutions(p, spec.name));
  ordered_json table = ordered_json::array();
  for (const auto& row : rows)
    table.push_back({{"resolution", row.resolution},
                     {"value", row.value},
                     {"self_difference", row.self_difference},
                     {"observed_order", row.observed_order}});
  r.results["rows"] = table;
  r.passed = true;
  if (p.contains("last_self_diff_max"))
    r.passed = r.passed && rows.back().self_difference < p["last_self_diff_max"].get<double>();
  if (p.contains("ratio_range")) {
    const double lo = p["ratio_range"][0].get<double>();
    const double hi = p["ratio_range"][1].get<double>();
    bool ok = rows.size() >= 3;
    for (size_t i = 2; i < rows.size(); ++i) {
      const double ratio = rows[i - 1].self_difference / rows[i].self_difference;
      r.results["ratio_" + std::to_string(i)] = ratio;
      ok = ok && ratio >= lo && ratio <= hi;
    }
    r.passed = r.passed && ok;
  }
  if (get_or<bool>(p, "monotone_decreasing", false)) {
    bool ok = true;
    for (size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i].value <= rows[i - 1].value;
    r.passed = r.passed && ok;
  }
  return r;
}

CheckResult dispatch(const Scenario& s, const CheckSpec& spec) {
  if (spec.type == "validate") return run_validate(s, spec);
  if (spec.type == "curvature-oracle") return run_curvature_oracle(s, spec);
  if (spec.type == "affine") return run_affine(s, spec);
  if (spec.type == "parallel") return run_parallel(s, spec);
  if (spec.type == "stokes") return run_stokes(s, spec);
  if (spec.type == "total-ricci") return run_total_ricci(s, spec);
  if (spec.type == "global-norm") return run_global_norm(s, spec);
  if (spec.type == "reversibility") return run_reversibility(s, spec);
  if (spec.type == "convergence") return run_convergence(s, spec);
  config_fail(spec.name, "unknown check type");
}

}  // namespace

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

Report run_scenario(const Scenario& scenario, const std::string& config_path) {
  Report report;
  report.config_path = config_path;
  report.seed = scenario.seed;
  for (const auto& spec : scenario.checks) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult result;
    try {
      result = dispatch(scenario, spec);
    } catch (const ConfigError&) {
      throw;  // configuration problems abort the run
    } catch (const Error& e) {
      result.passed = false;
      result.error = e.what();
    }
    result.name = spec.name;
    result.type = spec.type;
    result.inputs = spec.params;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.checks.push_back(std::move(result));
  }
  return report;
}

ordered_json Report::to_json() const {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config"] = config_path;
  j["seed"] = seed;
  ordered_json arr = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["type"] = c.type;
    cj["inputs"] = c.inputs;
    cj["results"] = c.results;
    if (!c.error.empty()) cj["error"] = c.error;
    cj["pass"] = c.passed;
    arr.push_back(std::move(cj));
  }
  j["checks"] = std::move(arr);
  j["all_passed"] = all_passed();
  return j;
}

std::string Report::timings_csv() const {
  std::ostringstream os;
  os << "check,seconds\n";
  for (const auto& c : checks) os << c.name << "," << c.seconds << "\n";
  return os.str();
}

std::vector<ConvergenceRow> convergence_study(const Scenario& scenario,
                                              const std::string& check_name,
                                              const std::vector<int>& factors) {
  for (const auto& spec : scenario.checks) {
    if (spec.name != check_name) continue;
    ordered_json p = spec.params;
    int base = get_or<int>(p, "resolution", 0);
    if (spec.type == "stokes" || spec.type == "total-ricci" || spec.type == "global-norm") {
      if (base < 8) config_fail(check_name, "check has no usable base resolution");
      // reuse the quadrature targets with the check's own parameters
      p["target"] = spec.type;
      std::vector<int> resolutions;
      for (int f : factors) resolutions.push_back(base * f);
      if (spec.type == "stokes") {
        std::vector<ConvergenceRow> rows;
        for (size_t i = 0; i < resolutions.size(); ++i) {
          ConvergenceRow row;
          row.resolution = resolutions[i];
          const auto grid = build_sm_grid(scenario.metric, scenario.domain,
                                          {resolutions[i], resolutions[i], resolutions[i]},
                                          get_or<double>(p, "theta_offset", 0.0));
          row.value = verify_stokes_lemma(
              scenario.metric, grid,
              Expression::parse(require_key(p, "f", check_name).get<std::string>(),
                                scenario.domain.dim()));
          row.self_difference = i == 0 ? 0.0 : std::abs(row.value - rows[i - 1].value);
          row.observed_order = 0.0;
          rows.push_back(row);
        }
        return rows;
      }
      return convergence_rows(scenario, p, resolutions);
    }
    if (spec.type == "convergence") {
      ordered_json pp = spec.params;
      std::vector<int> resolutions;
      if (pp.contains("resolution")) {
        for (int f : factors) resolutions.push_back(pp["resolution"].get<int>() * f);
      } else {
        resolutions = check_resolutions(pp, check_name);
      }
      return convergence_rows(scenario, pp, resolutions);
    }
    config_fail(check_name, "check type '" + spec.type + "' is not quadrature- or ODE-based");
  }
  config_fail(check_name, "no check with this name");
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "resolution,value,self_difference,observed_order\n";
  for (const auto& r : rows)
    os << r.resolution << "," << r.value << "," << r.self_difference << ","
       << r.observed_order << "\n";
  return os.str();
}

std::string scenario_schema() {
  static const char* schema = R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "finsler-lab scenario",
  "type": "object",
  "required": ["domain", "metric", "checks"],
  "properties": {
    "domain": {
      "type": "object",
      "required": ["dim"],
      "properties": {
        "dim": {"type": "integer", "minimum": 2},
        "periods": {
          "type": "array",
          "items": {"type": ["number", "null"], "exclusiveMinimum": 0},
          "description": "one entry per axis; null leaves the axis open, all numeric makes a torus"
        }
      }
    },
    "metric": {
      "type": "object",
      "required": ["family"],
      "properties": {
        "family": {"enum": ["euclidean", "riemannian", "randers", "custom"]},
        "A": {"type": "array", "description": "euclidean: constant SPD matrix"},
        "a": {"type": "array", "description": "riemannian/randers: matrix of expressions in x"},
        "b": {"type": "array", "description": "randers: covector of expressions in x"},
        "F": {"type": "string", "description": "custom: positively 1-homogeneous expression in x, y"}
      }
    },
    "seed": {"type": "integer", "description": "required when any check samples randomly"},
    "fields": {
      "type": "object",
      "additionalProperties": {"type": "array", "items": {"type": "string"}}
    },
    "checks": {
      "type": "array",
      "minItems": 1,
      "items": {
        "type": "object",
        "required": ["name", "type"],
        "properties": {
          "name": {"type": "string"},
          "type": {"enum": ["validate", "curvature-oracle", "affine", "parallel", "stokes",
                            "total-ricci", "global-norm", "reversibility", "convergence"]},
          "field": {"type": "string"},
          "f": {"type": "string", "description": "0-homogeneous scalar expression in x, y"},
          "samples": {"type": "integer", "minimum": 1},
          "resolution": {"type": "integer", "minimum": 8},
          "resolutions": {"type": "array", "items": {"type": "integer", "minimum": 8}},
          "factors": {"type": "array", "items": {"type": "integer", "minimum": 1}},
          "tolerance": {"type": "number"},
          "seed": {"type": "integer"},
          "theta_offset": {"type": "number"},
          "constant_curvature": {"type": "number"},
          "expected": {"type": "number"},
          "rel_tolerance": {"type": "number"},
          "max_abs": {"type": "number"},
          "residual_max": {"type": "number"},
          "residual_min": {"type": "number"},
          "energy_max": {"type": "number"},
          "affine_max": {"type": "number"},
          "jacobi_min": {"type": "number"},
          "check_decreasing": {"type": "boolean"},
          "monotone_decreasing": {"type": "boolean"},
          "last_self_diff_max": {"type": "number"},
          "ratio_range": {"type": "array", "items": {"type": "number"}},
          "self_convergence": {"type": "object"},
          "target": {"enum": ["volume", "stokes", "total-ricci", "global-norm", "geodesic-order"]},
          "p0": {"type": "object", "properties": {"x": {"type": "array"}, "y": {"type": "array"}}},
          "t_end": {"type": "number"},
          "flow": {
            "type": "object",
            "properties": {
              "t": {"type": "number"},
              "steps": {"type": "integer"},
              "geodesic_steps": {"type": "integer"},
              "t_geodesic": {"type": "number"},
              "p0": {"type": "object"},
              "defect_max": {"type": "number"},
              "defect_min": {"type": "number"}
            }
          }
        }
      }
    }
  }
})";
  return schema;
}

}  // namespace finsler
