// Command-line front end: run bundled or custom scenarios, list the
// catalog, and summarize logs.

#include "omniam/report.hpp"
#include "omniam/runner.hpp"
#include "omniam/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#ifndef OMNIAM_DEFAULT_SCENARIO_DIR
#define OMNIAM_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace {

std::string envOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

int runCommand(const std::string& file, std::optional<std::uint64_t> seed, std::string out_dir,
               const std::vector<std::string>& overrides, bool quiet) {
  using namespace omniam;
  ScenarioConfig cfg = loadScenario(file, overrides);
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = envOr("OMNIAM_OUT_DIR", "out");

  const RunLog log = runScenario(cfg);
  const RunFiles files = writeRunLog(log, out_dir, cfg.name);
  const Metrics metrics = computeMetrics(log.control, cfg.analysis);
  const auto results = evaluateAssertions(metrics, cfg.assertions);

  std::cout << "scenario " << cfg.name << " (seed " << cfg.seed << ")\n";
  std::cout << "log      " << files.control.string() << '\n';
  std::cout << "sensor   " << files.sensor.string() << '\n';
  if (!quiet) {
    std::cout << "metrics:\n";
    printMetrics(std::cout, metrics);
  }
  bool ok = log.completed;
  if (!log.completed) std::cout << "FAIL  run aborted: " << log.failure << '\n';
  printAssertions(std::cout, results);
  for (const auto& r : results) ok = ok && r.passed;
  std::cout << (ok ? "PASSED" : "FAILED") << '\n';
  return ok ? 0 : 1;
}

int listCommand(const std::string& dir) {
  const auto catalog = omniam::scenarioCatalog(dir);
  if (catalog.empty()) {
    std::cerr << "no scenarios found in " << dir << '\n';
    return 1;
  }
  std::size_t width = 0;
  for (const auto& e : catalog) width = std::max(width, e.name.size());
  for (const auto& e : catalog)
    std::cout << e.name << std::string(width - e.name.size() + 2, ' ') << e.description << '\n';
  return 0;
}

int analyzeCommand(const std::string& file, bool report, const std::string& scenario) {
  using namespace omniam;
  std::ifstream in(file);
  if (!in) {
    std::cerr << "cannot open " << file << '\n';
    return 2;
  }
  const LogTable table = readCsv(in);
  AnalysisConfig analysis;
  std::vector<Assertion> assertions;
  if (!scenario.empty()) {
    const ScenarioConfig cfg = loadScenario(scenario);
    analysis = cfg.analysis;
    assertions = cfg.assertions;
  }
  const Metrics metrics = computeMetrics(table, analysis);
  if (report) {
    std::cout << "report for " << file << '\n';
    printMetrics(std::cout, metrics);
  }
  if (assertions.empty()) return 0;
  const auto results = evaluateAssertions(metrics, assertions);
  printAssertions(std::cout, results);
  for (const auto& r : results)
    if (!r.passed) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tilt-rotor aerial manipulator simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario; exit code 0 only if its assertions pass");
  std::string run_file;
  std::uint64_t seed_value = 0;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  run->add_option("scenario", run_file, "Scenario file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory (default: $OMNIAM_OUT_DIR or ./out)");
  run->add_option("--override", overrides, "Set a config value, e.g. gains.preset=rope-pull-2")->take_all();
  run->add_flag("--quiet", quiet, "Print assertions only");

  auto* list = app.add_subcommand("list", "List bundled scenarios");
  std::string list_dir = envOr("OMNIAM_SCENARIO_DIR", OMNIAM_DEFAULT_SCENARIO_DIR);
  list->add_option("--dir", list_dir, "Scenario directory (default: $OMNIAM_SCENARIO_DIR)");

  auto* analyze = app.add_subcommand("analyze", "Summarize a control log");
  std::string log_file;
  bool report = false;
  std::string scenario_file;
  analyze->add_option("log", log_file, "Control log CSV")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--report", report, "Print RMSE, rise time and peak tables");
  analyze->add_option("--scenario", scenario_file, "Scenario file for analysis windows and assertions")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = seed_value;
      return runCommand(run_file, seed, out_dir, overrides, quiet);
    }
    if (*list) return listCommand(list_dir);
    if (*analyze) return analyzeCommand(log_file, report, scenario_file);
  } catch (const omniam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
