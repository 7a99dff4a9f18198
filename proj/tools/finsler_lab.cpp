// finsler-lab: declarative scenario runner for the Finsler geometry engine.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "finsler/scenario.hpp"

namespace fs = std::filesystem;
using namespace finsler;

namespace {

int exit_code_for(const Report& report) { return report.all_passed() ? 0 : 1; }

void print_check_lines(const Report& report, std::ostream& os) {
  for (const auto& c : report.checks) {
    os << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.type << ")";
    if (!c.error.empty()) os << "  error: " << c.error;
    os << "\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const Scenario scenario = Scenario::load(config_path);
  const Report report = run_scenario(scenario, config_path);
  print_check_lines(report, std::cerr);

  const std::string json_text = report.to_json().dump(2) + "\n";
  if (out_dir.empty()) {
    std::cout << json_text;
    std::cerr << report.timings_csv();
  } else {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "report.json") << json_text;
    std::ofstream(fs::path(out_dir) / "timings.csv") << report.timings_csv();
    for (const auto& c : report.checks) {
      if (c.type != "convergence" || !c.results.contains("rows")) continue;
      std::vector<ConvergenceRow> rows;
      for (const auto& row : c.results["rows"])
        rows.push_back({row["resolution"].get<double>(), row["value"].get<double>(),
                        row["self_difference"].get<double>(),
                        row["observed_order"].get<double>()});
      std::ofstream(fs::path(out_dir) / (c.name + ".csv")) << convergence_csv(rows);
    }
    std::cerr << "report written to " << (fs::path(out_dir) / "report.json").string() << "\n";
  }
  return exit_code_for(report);
}

int cmd_validate(const std::string& config_path) {
  Scenario scenario = Scenario::load(config_path);
  // keep only the metric-validation checks; synthesize a default when absent
  std::vector<CheckSpec> kept;
  for (const auto& c : scenario.checks)
    if (c.type == "validate") kept.push_back(c);
  if (kept.empty()) {
    CheckSpec spec;
    spec.name = "validate";
    spec.type = "validate";
    spec.params = {{"name", "validate"}, {"type", "validate"}, {"samples", 256}};
    kept.push_back(spec);
  }
  scenario.checks = kept;
  const Report report = run_scenario(scenario, config_path);
  print_check_lines(report, std::cerr);
  std::cout << report.to_json().dump(2) << "\n";
  return exit_code_for(report);
}

int cmd_converge(const std::string& config_path, const std::string& check_name,
                 const std::vector<int>& factors, const std::string& out_dir) {
  const Scenario scenario = Scenario::load(config_path);
  const auto rows = convergence_study(scenario, check_name, factors);
  const std::string csv = convergence_csv(rows);
  if (out_dir.empty()) {
    std::cout << csv;
  } else {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / (check_name + ".csv")) << csv;
    std::cerr << "table written to " << (fs::path(out_dir) / (check_name + ".csv")).string()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finsler-lab: numerical Finsler geometry scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, check_name;
  std::vector<int> factors{1, 2, 4};

  auto* validate = app.add_subcommand("validate-metric", "run the metric axiom checks of a config");
  validate->add_option("config", config_path, "scenario config (JSON)")->required();

  auto* run = app.add_subcommand("run", "execute every check of a scenario");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "directory for report.json, tables, timings");

  auto* converge = app.add_subcommand("converge", "resolution-scaling table for one check");
  converge->add_option("config", config_path, "scenario config (JSON)")->required();
  converge->add_option("--check", check_name, "check name from the config")->required();
  converge->add_option("--factors", factors, "resolution multipliers")->delimiter(',');
  converge->add_option("--out", out_dir, "directory for the CSV table");

  auto* schema = app.add_subcommand("report-schema", "print the scenario config JSON schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema->parsed()) {
      std::cout << scenario_schema() << "\n";
      return 0;
    }
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (converge->parsed()) return cmd_converge(config_path, check_name, factors, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
