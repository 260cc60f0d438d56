#pragma once

#include "omniam/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace omniam {

/// Column-oriented numeric table with a header row.
struct LogTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  bool hasColumn(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
  std::size_t size() const { return rows.size(); }
};

/// Frozen schema of the control-rate log. Units are part of the names.
const std::vector<std::string>& controlLogColumns();
/// Frozen schema of the force-sensor log.
const std::vector<std::string>& sensorLogColumns();

/// Planner mode codes in the planner_mode column; -1 when no planner runs.
int plannerModeCode(PlannerMode m);

struct RunLog {
  LogTable control;
  LogTable sensor;
  bool completed = true;
  std::string failure;  // set when the run aborted
};

/// Runs the closed loop: physics at the physics rate, estimator and
/// controller at the control rate, perception and planner at the planner
/// rate, force sensor at its own rate. Deterministic for a fixed config and
/// seed. A non-finite state or an undefined attitude error ends the run with
/// `completed = false` and the samples logged so far.
RunLog runScenario(const ScenarioConfig& cfg);

/// Values are printed with %.10g so equal runs produce equal bytes.
void writeCsv(std::ostream& out, const LogTable& table);
LogTable readCsv(std::istream& in);

struct RunFiles {
  std::filesystem::path control;
  std::filesystem::path sensor;
};
/// Writes <dir>/<stem>.csv and <dir>/<stem>_sensor.csv.
RunFiles writeRunLog(const RunLog& log, const std::filesystem::path& dir, const std::string& stem);

}  // namespace omniam
