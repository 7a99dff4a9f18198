#pragma once

// Declarative scenario runner.  A scenario config (JSON) names a chart
// domain, a metric, vector fields, and a list of checks; running it executes
// every check and produces a deterministic report.  Wall-clock timings are
// kept out of the report so identical (config, seed, version) runs are
// byte-identical at any thread count; they are emitted separately.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "finsler/expression.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

inline constexpr const char* kToolName = "finsler-lab";
inline constexpr const char* kToolVersion = "0.1.0";

struct CheckSpec {
  std::string name;
  std::string type;
  nlohmann::ordered_json params;
};

struct Scenario {
  ChartDomain domain{2};
  MetricSpec metric;
  std::map<std::string, VectorFieldDef> fields;
  uint64_t seed = 0;
  std::vector<CheckSpec> checks;

  static Scenario load(const std::string& config_path);
  static Scenario from_json(const nlohmann::ordered_json& j);

  const VectorFieldDef& field(const std::string& name) const;
};

struct CheckResult {
  std::string name;
  std::string type;
  bool passed = false;
  std::string error;  // nonempty when the check aborted
  nlohmann::ordered_json inputs;
  nlohmann::ordered_json results;
  double seconds = 0.0;  // reported separately, never in the JSON report
};

struct Report {
  std::string config_path;
  uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  nlohmann::ordered_json to_json() const;
  std::string timings_csv() const;
};

/// Executes every check in config order.  Numeric errors abort only the
/// owning check; config errors throw ConfigError.
Report run_scenario(const Scenario& scenario, const std::string& config_path);

/// Convergence table for one quadrature- or ODE-based check.
struct ConvergenceRow {
  double resolution = 0;
  double value = 0;
  double self_difference = 0;  // |value - previous value|
  double observed_order = 0;   // log2 of successive self-difference ratios
};

std::vector<ConvergenceRow> convergence_study(const Scenario& scenario,
                                              const std::string& check_name,
                                              const std::vector<int>& factors);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

/// JSON schema of the scenario config, served by the CLI.
std::string scenario_schema();

}  // namespace finsler
